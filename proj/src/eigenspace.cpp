#include "eigengaze/eigenspace.hpp"

#include <algorithm>
#include <cmath>

#include "eigengaze/error.hpp"
#include "eigengaze/linalg.hpp"
#include "eigengaze/numfmt.hpp"

namespace eigengaze {

namespace {

constexpr std::string_view kMagic = "EIGENGAZE";
constexpr std::int64_t kVersion = 1;

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

void check_vector(const Eigenspace& es, std::span<const double> v) {
  if (v.size() != es.dim())
    throw Error(ErrorCode::DimensionMismatch, "vector has dim " + std::to_string(v.size()) +
                                                  ", eigenspace '" + es.object_id() + "' has dim " +
                                                  std::to_string(es.dim()));
}

void check_mode(const Eigenspace& es, const AppearanceVector& v) {
  if (v.norm_mode() != es.config().norm_mode)
    throw Error(ErrorCode::NormModeMismatch, "appearance is " + std::string(to_string(v.norm_mode())) +
                                                 ", eigenspace '" + es.object_id() + "' expects " +
                                                 std::string(to_string(es.config().norm_mode)));
}

// <basis[i], v - mean> for every basis vector.
std::vector<double> coordinates(const std::vector<double>& mean, const std::vector<std::vector<double>>& basis,
                                std::span<const double> v) {
  std::vector<double> centered(v.begin(), v.end());
  for (std::size_t i = 0; i < centered.size(); ++i) centered[i] -= mean[i];
  std::vector<double> coords(basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i) coords[i] = dot(basis[i], centered);
  return coords;
}

void append_reals(std::string& out, std::span<const double> values) {
  for (double x : values) {
    out.push_back(' ');
    out += numfmt::real(x);
  }
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

// Line-by-line reader; every structural failure is a CorruptField.
class ModelReader {
 public:
  explicit ModelReader(std::string_view text) : text_(text) {}

  bool at_end() const { return pos_ >= text_.size(); }

  std::vector<std::string_view> line() {
    if (at_end()) throw Error(ErrorCode::CorruptField, "unexpected end of model");
    const std::size_t nl = text_.find('\n', pos_);
    const std::size_t end = nl == std::string_view::npos ? text_.size() : nl;
    auto tokens = split(text_.substr(pos_, end - pos_));
    pos_ = nl == std::string_view::npos ? text_.size() : nl + 1;
    ++line_no_;
    return tokens;
  }

  std::vector<std::string_view> expect(std::string_view keyword, std::size_t min_tokens) {
    auto tokens = line();
    if (tokens.empty() || tokens[0] != keyword || tokens.size() < min_tokens) fail(keyword);
    return tokens;
  }

  [[noreturn]] void fail(std::string_view field) const {
    throw Error(ErrorCode::CorruptField, "bad '" + std::string(field) + "' at line " + std::to_string(line_no_));
  }

  double real(std::string_view token, std::string_view field) const {
    auto v = numfmt::parse_real(token);
    if (!v) fail(field);
    return *v;
  }

  std::int64_t integer(std::string_view token, std::string_view field) const {
    auto v = numfmt::parse_int(token);
    if (!v) fail(field);
    return *v;
  }

  std::vector<double> reals(const std::vector<std::string_view>& tokens, std::size_t first,
                            std::size_t count, std::string_view field) const {
    if (tokens.size() != first + count) fail(field);
    std::vector<double> out;
    out.reserve(count);
    for (std::size_t i = first; i < tokens.size(); ++i) out.push_back(real(tokens[i], field));
    return out;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  int line_no_ = 0;
};

}  // namespace

bool valid_object_id(std::string_view id) {
  if (id.empty() || id.front() == '.') return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
           c == '-' || c == '.';
  });
}

Eigenspace::Eigenspace(std::string object_id, std::vector<double> mean, std::vector<double> eigenvalues,
                       std::vector<std::vector<double>> basis, EigenspaceConfig config,
                       std::vector<ManifoldPoint> manifold)
    : object_id_(std::move(object_id)),
      mean_(std::move(mean)),
      eigenvalues_(std::move(eigenvalues)),
      basis_(std::move(basis)),
      config_(config),
      manifold_(std::move(manifold)) {
  if (!valid_object_id(object_id_)) throw Error(ErrorCode::InvalidArgument, "invalid object id '" + object_id_ + "'");
  if (mean_.empty() || !all_finite(mean_)) throw Error(ErrorCode::InvalidArgument, "mean must be non-empty and finite");
  if (!(config_.energy_threshold > 0.0) || config_.energy_threshold > 1.0)
    throw Error(ErrorCode::InvalidArgument, "energy threshold must be in (0, 1]");
  if (config_.k_override && *config_.k_override == 0) throw Error(ErrorCode::InvalidArgument, "k override must be >= 1");

  const std::size_t k = basis_.size();
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "eigenspace needs at least one basis vector");
  if (eigenvalues_.size() != k) throw Error(ErrorCode::DimensionMismatch, "eigenvalue count differs from basis size");
  for (std::size_t i = 0; i < k; ++i) {
    if (!std::isfinite(eigenvalues_[i]) || eigenvalues_[i] < 0.0)
      throw Error(ErrorCode::InvalidArgument, "eigenvalues must be finite and non-negative");
    if (i > 0 && eigenvalues_[i] > eigenvalues_[i - 1])
      throw Error(ErrorCode::InvalidArgument, "eigenvalues must be non-increasing");
    if (basis_[i].size() != dim()) throw Error(ErrorCode::DimensionMismatch, "basis vector length differs from dim");
    if (!all_finite(basis_[i])) throw Error(ErrorCode::InvalidArgument, "basis vector not finite");
    for (std::size_t j = 0; j <= i; ++j) {
      const double expected = i == j ? 1.0 : 0.0;
      if (std::abs(dot(basis_[i], basis_[j]) - expected) > 1e-8)
        throw Error(ErrorCode::InvalidArgument, "basis is not orthonormal");
    }
  }
  if (manifold_.size() < k) throw Error(ErrorCode::InvalidArgument, "k exceeds the number of training appearances");
  for (const auto& point : manifold_) {
    if (point.coords.size() != k) throw Error(ErrorCode::DimensionMismatch, "manifold point has wrong length");
    if (!all_finite(point.coords)) throw Error(ErrorCode::InvalidArgument, "manifold point not finite");
    if (point.label.object_id != object_id_)
      throw Error(ErrorCode::InvalidArgument, "manifold point labelled with another object");
  }
}

std::vector<double> Eigenspace::project(std::span<const double> v) const {
  check_vector(*this, v);
  return coordinates(mean_, basis_, v);
}

std::vector<double> Eigenspace::project(const AppearanceVector& v) const {
  check_mode(*this, v);
  return project(v.values());
}

std::vector<double> Eigenspace::reconstruct(std::span<const double> coords) const {
  if (coords.size() != k())
    throw Error(ErrorCode::DimensionMismatch,
                "expected " + std::to_string(k()) + " coordinates, got " + std::to_string(coords.size()));
  std::vector<double> out = mean_;
  for (std::size_t i = 0; i < k(); ++i) {
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += coords[i] * basis_[i][j];
  }
  return out;
}

double Eigenspace::residual(std::span<const double> v) const {
  const auto coords = project(v);
  std::vector<double> diff(v.begin(), v.end());
  for (std::size_t j = 0; j < diff.size(); ++j) diff[j] -= mean_[j];
  for (std::size_t i = 0; i < k(); ++i) {
    for (std::size_t j = 0; j < diff.size(); ++j) diff[j] -= coords[i] * basis_[i][j];
  }
  return norm2(diff);
}

double Eigenspace::residual(const AppearanceVector& v) const {
  check_mode(*this, v);
  return residual(v.values());
}

Eigenspace build_eigenspace(std::string object_id, std::span<const AppearanceVector> appearances,
                            const EigenspaceConfig& config, std::vector<double>* spectrum) {
  if (appearances.empty()) throw Error(ErrorCode::DegenerateSet, "no appearances for '" + object_id + "'");
  if (!valid_object_id(object_id)) throw Error(ErrorCode::InvalidArgument, "invalid object id '" + object_id + "'");
  if (!(config.energy_threshold > 0.0) || config.energy_threshold > 1.0)
    throw Error(ErrorCode::InvalidArgument, "energy threshold must be in (0, 1]");
  if (config.k_override && *config.k_override == 0) throw Error(ErrorCode::InvalidArgument, "k override must be >= 1");

  const std::size_t d = appearances.front().dim();
  std::vector<std::vector<double>> columns;
  columns.reserve(appearances.size());
  for (const auto& a : appearances) {
    if (a.dim() != d) throw Error(ErrorCode::DimensionMismatch, "appearances differ in dimension");
    if (a.norm_mode() != config.norm_mode)
      throw Error(ErrorCode::NormModeMismatch, "appearance norm mode differs from config");
    columns.emplace_back(a.values().begin(), a.values().end());
  }

  PcaResult pca = gram_pca(columns, config.centered);
  if (pca.eigenvalues.empty())
    throw Error(ErrorCode::DegenerateSet, "appearances of '" + object_id + "' span no positive-variance direction");

  if (spectrum) *spectrum = pca.eigenvalues;
  const std::size_t k = config.k_override ? std::min(*config.k_override, pca.eigenvalues.size())
                                          : choose_k(pca.eigenvalues, config.energy_threshold);
  pca.eigenvalues.resize(k);
  pca.basis.resize(k);

  std::vector<ManifoldPoint> manifold;
  manifold.reserve(appearances.size());
  for (const auto& a : appearances) {
    ViewLabel label = a.label();
    label.object_id = object_id;
    manifold.push_back({coordinates(pca.mean, pca.basis, a.values()), std::move(label)});
  }
  return Eigenspace(std::move(object_id), std::move(pca.mean), std::move(pca.eigenvalues), std::move(pca.basis),
                    config, std::move(manifold));
}

std::string save_model(const Eigenspace& es) {
  std::string out;
  out += std::string(kMagic) + " " + std::to_string(kVersion) + "\n";
  out += "object " + es.object_id() + "\n";
  out += "dim " + std::to_string(es.dim()) + "\n";
  out += "k " + std::to_string(es.k()) + "\n";
  const auto& cfg = es.config();
  out += "config " + std::string(cfg.centered ? "1" : "0") + " " + std::string(to_string(cfg.norm_mode)) + " " +
         numfmt::real(cfg.energy_threshold);
  if (cfg.k_override) out += " " + std::to_string(*cfg.k_override);
  out += "\n";
  out += "mean";
  append_reals(out, es.mean());
  out += "\n";
  for (std::size_t i = 0; i < es.k(); ++i) out += "eigenvalue " + std::to_string(i + 1) + " " + numfmt::real(es.eigenvalues()[i]) + "\n";
  for (std::size_t i = 0; i < es.k(); ++i) {
    out += "basis " + std::to_string(i + 1);
    append_reals(out, es.basis()[i]);
    out += "\n";
  }
  for (const auto& p : es.manifold()) {
    out += "point " + std::to_string(p.label.view_angle_deg) + " " + (p.label.occluded ? "1" : "0");
    append_reals(out, p.coords);
    out += "\n";
  }
  out += "END\n";
  return out;
}

Eigenspace load_model(std::string_view bytes) {
  ModelReader in(bytes);
  if (in.at_end()) throw Error(ErrorCode::BadMagic, "empty model file");
  const auto magic = in.line();
  if (magic.empty() || magic[0] != kMagic) throw Error(ErrorCode::BadMagic, "model does not start with EIGENGAZE");
  if (magic.size() != 2) in.fail("version");
  const auto version = in.integer(magic[1], "version");
  if (version != kVersion)
    throw Error(ErrorCode::VersionMismatch, "model version " + std::to_string(version) + ", supported " +
                                                std::to_string(kVersion));

  const auto object = in.expect("object", 2);
  if (object.size() != 2) in.fail("object");
  std::string object_id(object[1]);

  const auto dim_line = in.expect("dim", 2);
  const auto d = in.integer(dim_line[1], "dim");
  const auto k_line = in.expect("k", 2);
  const auto k = in.integer(k_line[1], "k");
  if (dim_line.size() != 2 || k_line.size() != 2 || d < 1 || k < 1 || d > (std::int64_t{1} << 28)) in.fail("dim/k");

  const auto cfg_line = in.expect("config", 4);
  if (cfg_line.size() > 5 || (cfg_line[1] != "0" && cfg_line[1] != "1")) in.fail("config");
  EigenspaceConfig config;
  config.centered = cfg_line[1] == "1";
  if (cfg_line[2] != "raw" && cfg_line[2] != "unit") in.fail("config");
  config.norm_mode = parse_norm_mode(cfg_line[2]);
  config.energy_threshold = in.real(cfg_line[3], "config");
  if (cfg_line.size() == 5) {
    const auto kfix = in.integer(cfg_line[4], "config");
    if (kfix < 1) in.fail("config");
    config.k_override = static_cast<std::size_t>(kfix);
  }

  const auto dim = static_cast<std::size_t>(d);
  const auto kk = static_cast<std::size_t>(k);
  auto mean = in.reals(in.expect("mean", 1), 1, dim, "mean");

  std::vector<double> eigenvalues;
  for (std::size_t i = 0; i < kk; ++i) {
    const auto t = in.expect("eigenvalue", 3);
    if (t.size() != 3 || in.integer(t[1], "eigenvalue") != static_cast<std::int64_t>(i + 1)) in.fail("eigenvalue");
    eigenvalues.push_back(in.real(t[2], "eigenvalue"));
  }
  std::vector<std::vector<double>> basis;
  for (std::size_t i = 0; i < kk; ++i) {
    const auto t = in.expect("basis", 2);
    if (in.integer(t[1], "basis") != static_cast<std::int64_t>(i + 1)) in.fail("basis");
    basis.push_back(in.reals(t, 2, dim, "basis"));
  }

  std::vector<ManifoldPoint> manifold;
  while (true) {
    const auto t = in.line();
    if (t.size() == 1 && t[0] == "END") break;
    if (t.empty() || t[0] != "point" || t.size() < 3) in.fail("point");
    const auto angle = in.integer(t[1], "point");
    if (angle < 0 || angle > 359 || (t[2] != "0" && t[2] != "1")) in.fail("point");
    manifold.push_back({in.reals(t, 3, kk, "point"), ViewLabel(object_id, static_cast<int>(angle), t[2] == "1")});
  }
  while (!in.at_end()) {
    if (!in.line().empty()) in.fail("END");
  }

  try {
    return Eigenspace(std::move(object_id), std::move(mean), std::move(eigenvalues), std::move(basis), config,
                      std::move(manifold));
  } catch (const Error& e) {
    throw Error(ErrorCode::CorruptField, e.what());
  }
}

}  // namespace eigengaze

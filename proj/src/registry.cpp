#include "eigengaze/registry.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>

#include "eigengaze/error.hpp"
#include "eigengaze/linalg.hpp"
#include "eigengaze/numfmt.hpp"

namespace eigengaze {

namespace {

constexpr std::string_view kManifestName = "registry.manifest";
constexpr std::string_view kManifestMagic = "EIGENGAZE-REGISTRY";

void check_policy(const EnrollmentPolicy& policy) {
  if (policy.unknown_threshold && !(*policy.unknown_threshold > 0.0))
    throw Error(ErrorCode::InvalidArgument, "unknown threshold must be positive");
  if (!(policy.auto_margin >= 1.0)) throw Error(ErrorCode::InvalidArgument, "auto margin must be >= 1");
}

bool holds(const std::vector<std::shared_ptr<const Eigenspace>>& spaces, const std::string& id) {
  for (const auto& s : spaces) {
    if (s->object_id() == id) return true;
  }
  return false;
}

void check_compatible(const std::vector<std::shared_ptr<const Eigenspace>>& spaces, const Eigenspace& es) {
  if (holds(spaces, es.object_id())) throw Error(ErrorCode::DuplicateObject, "object '" + es.object_id() + "' already enrolled");
  if (spaces.empty()) return;
  const auto& first = *spaces.front();
  if (es.dim() != first.dim())
    throw Error(ErrorCode::DimensionMismatch, "object '" + es.object_id() + "' has dim " + std::to_string(es.dim()) +
                                                  ", registry has " + std::to_string(first.dim()));
  if (es.config().norm_mode != first.config().norm_mode)
    throw Error(ErrorCode::NormModeMismatch, "object '" + es.object_id() + "' uses a different norm mode");
}

double threshold_for(const EnrollmentPolicy& policy, std::span<const std::shared_ptr<const Eigenspace>> spaces) {
  if (policy.unknown_threshold) return *policy.unknown_threshold;
  return auto_threshold(spaces, policy.auto_margin);
}

std::string next_auto_name(const std::vector<std::shared_ptr<const Eigenspace>>& spaces) {
  for (std::size_t n = spaces.size() + 1;; ++n) {
    std::string name = "object-" + std::to_string(n);
    if (!holds(spaces, name)) return name;
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

}  // namespace

// Lock-free access to the registry internals for callers that already hold the lock.
struct RegistryAccess {
  static auto& spaces(ObjectRegistry& reg) { return reg.spaces_; }
  static auto& mutex(ObjectRegistry& reg) { return reg.mutex_; }
  static const auto& policy(ObjectRegistry& reg) { return reg.policy_; }
};

ObjectRegistry::ObjectRegistry(EnrollmentPolicy policy) : policy_(policy) { check_policy(policy_); }

EnrollmentPolicy ObjectRegistry::policy() const {
  std::shared_lock lock(mutex_);
  return policy_;
}

void ObjectRegistry::set_policy(EnrollmentPolicy policy) {
  check_policy(policy);
  std::unique_lock lock(mutex_);
  policy_ = policy;
}

std::size_t ObjectRegistry::size() const {
  std::shared_lock lock(mutex_);
  return spaces_.size();
}

bool ObjectRegistry::contains(const std::string& object_id) const {
  std::shared_lock lock(mutex_);
  return holds(spaces_, object_id);
}

std::vector<std::shared_ptr<const Eigenspace>> ObjectRegistry::snapshot() const {
  std::shared_lock lock(mutex_);
  return spaces_;
}

std::shared_ptr<const Eigenspace> ObjectRegistry::accumulate(const std::string& object_id,
                                                             std::span<const AppearanceVector> appearances,
                                                             const EigenspaceConfig& config) {
  if (contains(object_id)) throw Error(ErrorCode::DuplicateObject, "object '" + object_id + "' already enrolled");
  auto es = std::make_shared<const Eigenspace>(build_eigenspace(object_id, appearances, config));
  std::unique_lock lock(mutex_);
  check_compatible(spaces_, *es);
  spaces_.push_back(es);
  return es;
}

void ObjectRegistry::add(Eigenspace es) {
  auto shared = std::make_shared<const Eigenspace>(std::move(es));
  std::unique_lock lock(mutex_);
  check_compatible(spaces_, *shared);
  spaces_.push_back(std::move(shared));
}

double auto_threshold(std::span<const std::shared_ptr<const Eigenspace>> spaces, double margin) {
  double widest = -1.0;
  for (const auto& es : spaces) {
    const auto& points = es->manifold();
    if (points.size() < 2) continue;
    for (std::size_t i = 0; i < points.size(); ++i) {
      double nearest = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < points.size(); ++j) {
        if (i == j) continue;
        double sq = 0.0;
        for (std::size_t c = 0; c < points[i].coords.size(); ++c) {
          const double diff = points[i].coords[c] - points[j].coords[c];
          sq += diff * diff;
        }
        nearest = std::min(nearest, std::sqrt(sq));
      }
      widest = std::max(widest, nearest);
    }
  }
  if (widest < 0.0) throw Error(ErrorCode::InsufficientData, "automatic threshold needs a space with >= 2 manifold points");
  if (!(widest > 0.0)) throw Error(ErrorCode::InsufficientData, "every manifold has coincident points");
  return margin * widest;
}

double effective_threshold(const ObjectRegistry& reg) {
  const auto policy = reg.policy();
  if (policy.unknown_threshold) return *policy.unknown_threshold;
  return auto_threshold(reg.snapshot(), policy.auto_margin);
}

Decision classify_or_enroll(ObjectRegistry& reg, const AppearanceVector& v,
                            std::optional<std::span<const AppearanceVector>> pending_views,
                            const EigenspaceConfig& config, const RecognitionOptions& options) {
  Decision decision;
  if (!pending_views) {
    const auto spaces = reg.snapshot();
    if (spaces.empty()) throw Error(ErrorCode::EmptyRegistryNoViews, "registry is empty and no views were supplied");
    decision.result = recognize(spaces, v, options);
    decision.threshold = threshold_for(reg.policy(), spaces);
    decision.known = decision.result->combined_score <= decision.threshold;
    return decision;
  }

  // recognition and enrollment happen under one exclusive lock so concurrent
  // callers cannot both enroll the same unknown
  std::unique_lock lock(RegistryAccess::mutex(reg));
  auto& spaces = RegistryAccess::spaces(reg);
  if (!spaces.empty()) {
    decision.result = recognize(spaces, v, options);
    decision.threshold = threshold_for(RegistryAccess::policy(reg), spaces);
    decision.known = decision.result->combined_score <= decision.threshold;
    if (decision.known) return decision;
  }
  const std::string name = next_auto_name(spaces);
  auto es = std::make_shared<const Eigenspace>(build_eigenspace(name, *pending_views, config));
  check_compatible(spaces, *es);
  spaces.push_back(std::move(es));
  decision.enrolled_id = name;
  return decision;
}

void save_registry(const ObjectRegistry& reg, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
  const auto spaces = reg.snapshot();
  const auto policy = reg.policy();
  std::string manifest = std::string(kManifestMagic) + " 1\n";
  manifest += "threshold " + (policy.unknown_threshold ? numfmt::real(*policy.unknown_threshold) : std::string("auto")) + "\n";
  manifest += "margin " + numfmt::real(policy.auto_margin) + "\n";
  for (const auto& es : spaces) {
    write_file(dir / (es->object_id() + ".eig"), save_model(*es));
    manifest += "object " + es->object_id() + "\n";
  }
  manifest += "END\n";
  write_file(dir / kManifestName, manifest);
}

std::unique_ptr<ObjectRegistry> load_registry(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error(ErrorCode::IoError, "registry directory " + dir.string() + " not found");
  std::istringstream manifest(read_file(dir / kManifestName));
  const auto corrupt = [](const std::string& what) {
    return Error(ErrorCode::CorruptField, "registry manifest: " + what);
  };

  std::string line;
  if (!std::getline(manifest, line) || line != std::string(kManifestMagic) + " 1") {
    if (line.rfind(kManifestMagic, 0) == 0) throw Error(ErrorCode::VersionMismatch, "unsupported registry manifest version");
    throw Error(ErrorCode::BadMagic, "not a registry manifest");
  }

  EnrollmentPolicy policy;
  std::vector<std::string> ids;
  bool ended = false;
  while (std::getline(manifest, line)) {
    if (line.empty()) continue;
    if (ended) throw corrupt("content after END");
    std::istringstream fields(line);
    std::string key, value, extra;
    fields >> key >> value;
    if (key == "END" && value.empty()) {
      ended = true;
      continue;
    }
    if (value.empty() || (fields >> extra)) throw corrupt("bad line '" + line + "'");
    if (key == "threshold") {
      if (value == "auto") {
        policy.unknown_threshold.reset();
      } else {
        auto t = numfmt::parse_real(value);
        if (!t) throw corrupt("bad threshold");
        policy.unknown_threshold = *t;
      }
    } else if (key == "margin") {
      auto m = numfmt::parse_real(value);
      if (!m) throw corrupt("bad margin");
      policy.auto_margin = *m;
    } else if (key == "object") {
      if (!valid_object_id(value)) throw corrupt("bad object id '" + value + "'");
      ids.push_back(value);
    } else {
      throw corrupt("unknown key '" + key + "'");
    }
  }
  if (!ended) throw corrupt("missing END");

  std::unique_ptr<ObjectRegistry> reg;
  try {
    reg = std::make_unique<ObjectRegistry>(policy);
  } catch (const Error& e) {
    throw corrupt(e.what());
  }
  for (const auto& id : ids) {
    Eigenspace es = load_model(read_file(dir / (id + ".eig")));
    if (es.object_id() != id) throw corrupt("model " + id + ".eig holds object '" + es.object_id() + "'");
    reg->add(std::move(es));
  }
  return reg;
}

}  // namespace eigengaze

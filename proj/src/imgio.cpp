#include "eigengaze/imgio.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "eigengaze/error.hpp"
#include "eigengaze/rng.hpp"

namespace eigengaze {

namespace {

constexpr std::size_t kMaxPixels = std::size_t{1} << 28;

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Header cursor: skips whitespace and '#' comments between tokens.
class HeaderReader {
 public:
  explicit HeaderReader(std::string_view bytes) : bytes_(bytes) {}

  std::size_t pos() const { return pos_; }

  void skip_separators() {
    while (pos_ < bytes_.size()) {
      if (is_space(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::uint64_t number(const char* what) {
    skip_separators();
    if (pos_ >= bytes_.size() || !is_digit(bytes_[pos_]))
      throw Error(ErrorCode::MalformedHeader, std::string("missing ") + what);
    std::uint64_t value = 0;
    while (pos_ < bytes_.size() && is_digit(bytes_[pos_])) {
      value = value * 10 + static_cast<std::uint64_t>(bytes_[pos_] - '0');
      if (value > 0xFFFFFFFFULL) throw Error(ErrorCode::MalformedHeader, std::string(what) + " too large");
      ++pos_;
    }
    if (pos_ < bytes_.size() && !is_space(bytes_[pos_]) && bytes_[pos_] != '#')
      throw Error(ErrorCode::MalformedHeader, std::string("garbage after ") + what);
    return value;
  }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

std::vector<std::uint16_t> parse_plain_raster(std::string_view bytes, std::size_t pos,
                                              std::size_t count, unsigned max_value) {
  std::vector<std::uint16_t> samples;
  samples.reserve(count);
  while (true) {
    while (pos < bytes.size() && is_space(bytes[pos])) ++pos;
    if (pos >= bytes.size()) break;
    if (!is_digit(bytes[pos]))
      throw Error(ErrorCode::SampleCountMismatch, "non-numeric token in raster");
    std::uint64_t value = 0;
    while (pos < bytes.size() && is_digit(bytes[pos])) {
      value = std::min<std::uint64_t>(value * 10 + static_cast<std::uint64_t>(bytes[pos] - '0'),
                                      0x100000000ULL);
      ++pos;
    }
    if (pos < bytes.size() && !is_space(bytes[pos]))
      throw Error(ErrorCode::SampleCountMismatch, "non-numeric token in raster");
    if (samples.size() == count)
      throw Error(ErrorCode::SampleCountMismatch, "more than " + std::to_string(count) + " samples");
    if (value > max_value)
      throw Error(ErrorCode::SampleOutOfRange,
                  "sample " + std::to_string(value) + " exceeds max " + std::to_string(max_value));
    samples.push_back(static_cast<std::uint16_t>(value));
  }
  if (samples.size() != count)
    throw Error(ErrorCode::SampleCountMismatch,
                "expected " + std::to_string(count) + " samples, got " + std::to_string(samples.size()));
  return samples;
}

std::vector<std::uint16_t> parse_raw_raster(std::string_view bytes, std::size_t pos,
                                            std::size_t count, unsigned max_value) {
  const std::size_t bytes_per_sample = max_value < 256 ? 1 : 2;
  const std::size_t available = bytes.size() - pos;
  if (available != count * bytes_per_sample)
    throw Error(ErrorCode::SampleCountMismatch,
                "expected " + std::to_string(count * bytes_per_sample) + " raster bytes, got " +
                    std::to_string(available));
  std::vector<std::uint16_t> samples(count);
  for (std::size_t i = 0; i < count; ++i) {
    unsigned value = static_cast<unsigned char>(bytes[pos + i * bytes_per_sample]);
    if (bytes_per_sample == 2)
      value = (value << 8) | static_cast<unsigned char>(bytes[pos + 2 * i + 1]);
    if (value > max_value)
      throw Error(ErrorCode::SampleOutOfRange,
                  "sample " + std::to_string(value) + " exceeds max " + std::to_string(max_value));
    samples[i] = static_cast<std::uint16_t>(value);
  }
  return samples;
}

struct Point {
  double x;
  double y;
};

double cross(const Point& o, const Point& a, const Point& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Andrew's monotone chain; counter-clockwise, no collinear points.
std::vector<Point> convex_hull(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end(),
            [](const Point& a, const Point& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  if (pts.size() < 3) return pts;
  std::vector<Point> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Everything about a synthetic object that does not depend on the view.
struct SynthShape {
  std::vector<Point> hull;  // in units of the object radius
  double base = 0.0;        // mean fill intensity
  double gradient = 0.0;    // intensity change across one radius
  Point gradient_dir{1.0, 0.0};
};

SynthShape make_shape(std::string_view object_id, std::uint64_t seed) {
  SplitMix64 rng(fnv1a(object_id) ^ SplitMix64(seed).next());
  SynthShape shape;
  do {
    const std::size_t n = 5 + static_cast<std::size_t>(rng.below(5));
    std::vector<Point> pts;
    pts.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double theta = 2.0 * std::numbers::pi * rng.uniform();
      const double radius = 0.55 + 0.45 * rng.uniform();
      pts.push_back({radius * std::cos(theta), radius * std::sin(theta)});
    }
    shape.hull = convex_hull(std::move(pts));
  } while (shape.hull.size() < 3);

  const bool dark = rng.uniform() < 0.5;
  shape.base = dark ? 30.0 + 50.0 * rng.uniform() : 180.0 + 45.0 * rng.uniform();
  shape.gradient = 25.0 + 30.0 * rng.uniform();
  const double phi = 2.0 * std::numbers::pi * rng.uniform();
  shape.gradient_dir = {std::cos(phi), std::sin(phi)};
  return shape;
}

bool inside(const std::vector<Point>& hull, const Point& p) {
  for (std::size_t i = 0; i < hull.size(); ++i) {
    if (cross(hull[i], hull[(i + 1) % hull.size()], p) < 0) return false;
  }
  return true;
}

}  // namespace

RasterImage::RasterImage(std::size_t width, std::size_t height, unsigned max_value,
                         std::vector<std::uint16_t> samples)
    : width_(width), height_(height), max_value_(max_value), samples_(std::move(samples)) {
  if (width_ == 0 || height_ == 0) throw Error(ErrorCode::InvalidArgument, "image dimensions must be positive");
  if (max_value_ == 0 || max_value_ > 65535) throw Error(ErrorCode::InvalidArgument, "max_value must be in [1, 65535]");
  if (samples_.size() != width_ * height_)
    throw Error(ErrorCode::SampleCountMismatch, "samples length does not equal width*height");
  for (auto s : samples_) {
    if (s > max_value_) throw Error(ErrorCode::SampleOutOfRange, "sample exceeds max_value");
  }
}

std::string_view to_string(NormMode mode) { return mode == NormMode::Unit ? "unit" : "raw"; }

NormMode parse_norm_mode(std::string_view text) {
  if (text == "unit") return NormMode::Unit;
  if (text == "raw") return NormMode::Raw;
  throw Error(ErrorCode::InvalidArgument, "norm mode must be 'raw' or 'unit', got '" + std::string(text) + "'");
}

ViewLabel::ViewLabel(std::string id, int angle, bool occ)
    : object_id(std::move(id)), view_angle_deg(angle), occluded(occ) {
  if (angle < 0 || angle > 359)
    throw Error(ErrorCode::InvalidArgument, "view angle " + std::to_string(angle) + " outside [0, 359]");
}

AppearanceVector::AppearanceVector(std::vector<double> values, NormMode mode, ViewLabel label)
    : values_(std::move(values)), mode_(mode), label_(std::move(label)) {
  if (values_.empty()) throw Error(ErrorCode::InvalidArgument, "appearance vector is empty");
  double sq = 0.0;
  for (double v : values_) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "appearance vector has non-finite value");
    sq += v * v;
  }
  if (mode_ == NormMode::Unit && std::abs(std::sqrt(sq) - 1.0) > 1e-12)
    throw Error(ErrorCode::InvalidArgument, "unit-mode appearance vector is not unit norm");
}

RasterImage parse_pgm(std::string_view bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5'))
    throw Error(ErrorCode::MalformedHeader, "missing P2/P5 magic");
  const bool binary = bytes[1] == '5';
  if (bytes.size() > 2 && !is_space(bytes[2]) && bytes[2] != '#')
    throw Error(ErrorCode::MalformedHeader, "bad magic token");

  HeaderReader header(bytes.substr(2));
  const auto width = header.number("width");
  const auto height = header.number("height");
  const auto max_value = header.number("max value");
  if (width == 0 || height == 0) throw Error(ErrorCode::MalformedHeader, "zero image dimension");
  if (width * height > kMaxPixels) throw Error(ErrorCode::MalformedHeader, "image too large");
  if (max_value == 0 || max_value > 65535) throw Error(ErrorCode::MalformedHeader, "max value outside [1, 65535]");

  std::size_t pos = 2 + header.pos();
  const auto count = static_cast<std::size_t>(width * height);
  std::vector<std::uint16_t> samples;
  if (binary) {
    // exactly one whitespace byte separates the header from the raster
    if (pos >= bytes.size() || !is_space(bytes[pos]))
      throw Error(ErrorCode::MalformedHeader, "missing whitespace after max value");
    samples = parse_raw_raster(bytes, pos + 1, count, static_cast<unsigned>(max_value));
  } else {
    samples = parse_plain_raster(bytes, pos, count, static_cast<unsigned>(max_value));
  }
  return RasterImage(static_cast<std::size_t>(width), static_cast<std::size_t>(height),
                     static_cast<unsigned>(max_value), std::move(samples));
}

std::string write_pgm(const RasterImage& image, bool binary) {
  std::string out = binary ? "P5\n" : "P2\n";
  out += std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n";
  out += std::to_string(image.max_value()) + "\n";
  const auto samples = image.samples();
  if (binary) {
    const bool wide = image.max_value() >= 256;
    out.reserve(out.size() + samples.size() * (wide ? 2 : 1));
    for (auto s : samples) {
      if (wide) out.push_back(static_cast<char>(s >> 8));
      out.push_back(static_cast<char>(s & 0xFF));
    }
    return out;
  }
  // one image row per line, single spaces
  for (std::size_t r = 0; r < image.height(); ++r) {
    for (std::size_t c = 0; c < image.width(); ++c) {
      if (c) out.push_back(' ');
      out += std::to_string(samples[r * image.width() + c]);
    }
    out.push_back('\n');
  }
  return out;
}

AppearanceVector vectorize(const RasterImage& image, NormMode mode, ViewLabel label) {
  const double scale = static_cast<double>(image.max_value());
  std::vector<double> values(image.size());
  std::transform(image.samples().begin(), image.samples().end(), values.begin(),
                 [scale](std::uint16_t s) { return static_cast<double>(s) / scale; });
  if (mode == NormMode::Unit) {
    double sq = 0.0;
    for (double v : values) sq += v * v;
    if (sq == 0.0) throw Error(ErrorCode::ZeroImage, "cannot unit-normalize an all-zero image");
    const double norm = std::sqrt(sq);
    for (double& v : values) v /= norm;
  }
  return AppearanceVector(std::move(values), mode, std::move(label));
}

RasterImage apply_occlusion(const RasterImage& image, const OcclusionSpec& spec) {
  if (spec.w == 0 || spec.h == 0 || spec.x0 >= image.width() || spec.y0 >= image.height())
    throw Error(ErrorCode::EmptyOcclusion, "occlusion rectangle does not intersect the image");
  if (spec.fill > image.max_value())
    throw Error(ErrorCode::SampleOutOfRange, "occlusion fill exceeds max_value");
  const std::size_t x1 = std::min(image.width(), spec.x0 + spec.w);
  const std::size_t y1 = std::min(image.height(), spec.y0 + spec.h);
  std::vector<std::uint16_t> samples(image.samples().begin(), image.samples().end());
  for (std::size_t r = spec.y0; r < y1; ++r) {
    for (std::size_t c = spec.x0; c < x1; ++c) samples[r * image.width() + c] = static_cast<std::uint16_t>(spec.fill);
  }
  return RasterImage(image.width(), image.height(), image.max_value(), std::move(samples));
}

OcclusionSpec occlusion_for_fraction(std::size_t width, std::size_t height, double area_fraction,
                                     double center_x, double center_y, unsigned fill) {
  if (width == 0 || height == 0 || !(area_fraction > 0.0) || area_fraction > 1.0)
    throw Error(ErrorCode::InvalidArgument, "area fraction must be in (0, 1] on a non-empty image");
  const double target = area_fraction * static_cast<double>(width * height);
  std::size_t best_w = 1, best_h = 1;
  for (std::size_t w = 1; w <= width; ++w) {
    const auto h = std::min(height, static_cast<std::size_t>(std::floor(target / static_cast<double>(w))));
    if (h == 0) break;
    const double aspect = static_cast<double>(std::max(w, h)) / static_cast<double>(std::min(w, h));
    if (aspect > 1.5) continue;
    const std::size_t area = w * h, best_area = best_w * best_h;
    const auto skew = [](std::size_t a, std::size_t b) { return a > b ? a - b : b - a; };
    if (area > best_area || (area == best_area && skew(w, h) < skew(best_w, best_h))) {
      best_w = w;
      best_h = h;
    }
  }
  const auto place = [](double center, std::size_t extent, std::size_t limit) {
    const double start = std::round(center - static_cast<double>(extent) / 2.0);
    return static_cast<std::size_t>(std::clamp(start, 0.0, static_cast<double>(limit - extent)));
  };
  return OcclusionSpec{place(center_x, best_w, width), place(center_y, best_h, height), best_w, best_h, fill};
}

RasterImage synth_view(std::string_view object_id, int angle_deg, std::size_t side, std::uint64_t seed) {
  if (side < 8) throw Error(ErrorCode::SideTooSmall, "synthetic view side must be >= 8, got " + std::to_string(side));
  const SynthShape shape = make_shape(object_id, seed);

  constexpr unsigned kMax = 255;
  constexpr double kBackground = 128.0;
  constexpr int kSuper = 4;  // kSuper x kSuper subsamples per pixel

  const double center = static_cast<double>(side) / 2.0;
  const double radius = 0.42 * static_cast<double>(side);
  const double theta = static_cast<double>(angle_deg) * std::numbers::pi / 180.0;
  const double cs = std::cos(theta), sn = std::sin(theta);

  std::vector<std::uint16_t> samples(side * side);
  for (std::size_t r = 0; r < side; ++r) {
    for (std::size_t c = 0; c < side; ++c) {
      double acc = 0.0;
      for (int sy = 0; sy < kSuper; ++sy) {
        for (int sx = 0; sx < kSuper; ++sx) {
          const double x = (static_cast<double>(c) + (sx + 0.5) / kSuper - center) / radius;
          const double y = (static_cast<double>(r) + (sy + 0.5) / kSuper - center) / radius;
          // inverse rotation into the object frame
          const Point local{cs * x + sn * y, -sn * x + cs * y};
          if (inside(shape.hull, local)) {
            const double along = local.x * shape.gradient_dir.x + local.y * shape.gradient_dir.y;
            acc += std::clamp(shape.base + shape.gradient * along, 0.0, static_cast<double>(kMax));
          } else {
            acc += kBackground;
          }
        }
      }
      samples[r * side + c] = static_cast<std::uint16_t>(std::lround(acc / (kSuper * kSuper)));
    }
  }
  return RasterImage(side, side, kMax, std::move(samples));
}

}  // namespace eigengaze

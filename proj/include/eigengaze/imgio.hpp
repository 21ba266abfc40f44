#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace eigengaze {

/// Grayscale raster, row-major samples in [0, max_value].
class RasterImage {
 public:
  /// Throws SampleCountMismatch / SampleOutOfRange / InvalidArgument when the
  /// invariants do not hold.
  RasterImage(std::size_t width, std::size_t height, unsigned max_value,
              std::vector<std::uint16_t> samples);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  unsigned max_value() const noexcept { return max_value_; }
  std::size_t size() const noexcept { return samples_.size(); }
  std::span<const std::uint16_t> samples() const noexcept { return samples_; }
  std::uint16_t at(std::size_t row, std::size_t col) const { return samples_[row * width_ + col]; }

  friend bool operator==(const RasterImage&, const RasterImage&) = default;

 private:
  std::size_t width_;
  std::size_t height_;
  unsigned max_value_;
  std::vector<std::uint16_t> samples_;
};

enum class NormMode { Raw, Unit };

std::string_view to_string(NormMode mode);
/// Accepts "raw" or "unit"; anything else is InvalidArgument.
NormMode parse_norm_mode(std::string_view text);

/// Which object, from which viewpoint, and whether the capture was occluded.
struct ViewLabel {
  std::string object_id;
  int view_angle_deg = 0;
  bool occluded = false;

  ViewLabel() = default;
  /// Angle must lie in [0, 359].
  ViewLabel(std::string object_id, int view_angle_deg, bool occluded);

  friend bool operator==(const ViewLabel&, const ViewLabel&) = default;
};

/// One appearance as a flat real vector (a column of the training matrix).
class AppearanceVector {
 public:
  /// Values must be finite and non-empty; in Unit mode their norm must be 1 within 1e-12.
  AppearanceVector(std::vector<double> values, NormMode mode, ViewLabel label = {});

  std::size_t dim() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  NormMode norm_mode() const noexcept { return mode_; }
  const ViewLabel& label() const noexcept { return label_; }

 private:
  std::vector<double> values_;
  NormMode mode_;
  ViewLabel label_;
};

/// Axis-aligned rectangle painted with a constant value.
struct OcclusionSpec {
  std::size_t x0 = 0;
  std::size_t y0 = 0;
  std::size_t w = 1;
  std::size_t h = 1;
  unsigned fill = 0;
};

RasterImage parse_pgm(std::string_view bytes);
std::string write_pgm(const RasterImage& image, bool binary);

AppearanceVector vectorize(const RasterImage& image, NormMode mode, ViewLabel label = {});

/// Paints the rectangle clamped to the image bounds.
RasterImage apply_occlusion(const RasterImage& image, const OcclusionSpec& spec);

/// Largest rectangle with area <= area_fraction * width * height and aspect
/// ratio within 3:2, centered as closely as the bounds allow on (center_x, center_y).
OcclusionSpec occlusion_for_fraction(std::size_t width, std::size_t height, double area_fraction,
                                     double center_x, double center_y, unsigned fill);

/// Renders a seeded convex polygon rotated by angle_deg about the image
/// center. Pure function of its arguments.
RasterImage synth_view(std::string_view object_id, int angle_deg, std::size_t side,
                       std::uint64_t seed);

}  // namespace eigengaze

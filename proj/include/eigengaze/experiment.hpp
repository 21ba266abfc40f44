#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "eigengaze/eigenspace.hpp"
#include "eigengaze/imgio.hpp"
#include "eigengaze/recog.hpp"

namespace eigengaze {

struct LabeledImage {
  RasterImage image;
  ViewLabel label;
};

/// Where occluding rectangles sit. PerObject: one occluder position per
/// object, fixed in the image while the object turns, shared by its occluded
/// training and query views. PerView: a fresh position for every occluded view.
enum class OccluderPlacement { PerObject, PerView };

/// Capture protocol over synthetic objects: every object is viewed at
/// train_angles, some training views and some query views are occluded by a
/// rectangle covering occlusion_fraction of the image, and queries are taken
/// at train_angles shifted by query_offset_deg.
struct ProtocolConfig {
  std::vector<std::string> objects{"keyholder", "mobile", "pencilbox", "stapler"};
  std::size_t side = 32;
  std::vector<int> train_angles{0, 10, 20, 30, 40, 50, 60, 70, 80, 90};
  int query_offset_deg = 5;
  std::size_t occluded_train_per_object = 1;
  std::size_t occluded_queries_per_object = 2;
  double occlusion_fraction = 0.15;
  unsigned occlusion_fill = 0;
  OccluderPlacement placement = OccluderPlacement::PerObject;
  std::uint64_t seed = 1;
  EigenspaceConfig eigenspace;
  RecognitionOptions recognition;
};

struct ProtocolData {
  std::vector<LabeledImage> training;  // grouped by object, objects in config order
  std::vector<LabeledImage> queries;
};

/// Deterministic in the config (including seed).
ProtocolData make_protocol_data(const ProtocolConfig& config);

struct ProtocolOutcome {
  EvaluationReport report;
  std::vector<std::size_t> chosen_k;  // per object, config order
};

/// Builds one eigenspace per object from the training views and evaluates
/// the queries against them.
ProtocolOutcome run_protocol(const ProtocolConfig& config);

/// Vectorizes a labelled image set.
std::vector<AppearanceVector> vectorize_all(const std::vector<LabeledImage>& images, NormMode mode);

}  // namespace eigengaze

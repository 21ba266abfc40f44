#include "eigengaze/experiment.hpp"

#include <algorithm>

#include "eigengaze/error.hpp"
#include "eigengaze/registry.hpp"
#include "eigengaze/rng.hpp"

namespace eigengaze {

namespace {

// `count` distinct indices below n, in ascending order.
std::vector<std::size_t> pick_distinct(SplitMix64& rng, std::size_t n, std::size_t count) {
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  // partial Fisher-Yates
  for (std::size_t i = 0; i < count; ++i) std::swap(all[i], all[i + rng.below(n - i)]);
  all.resize(count);
  std::sort(all.begin(), all.end());
  return all;
}

struct Centre {
  double x, y;
};

Centre pick_centre(SplitMix64& rng, std::size_t side) {
  const double s = static_cast<double>(side);
  const double x = s * (0.3 + 0.4 * rng.uniform());
  return {x, s * (0.3 + 0.4 * rng.uniform())};
}

int wrap_degrees(int angle) { return ((angle % 360) + 360) % 360; }

}  // namespace

ProtocolData make_protocol_data(const ProtocolConfig& config) {
  const std::size_t views = config.train_angles.size();
  if (config.objects.empty() || views == 0) throw Error(ErrorCode::InvalidArgument, "protocol needs objects and angles");
  if (config.occluded_train_per_object > views || config.occluded_queries_per_object > views)
    throw Error(ErrorCode::InvalidArgument, "more occluded views than views");

  SplitMix64 rng(config.seed ^ 0x6F6363756C646564ULL);
  ProtocolData data;
  std::vector<Centre> centres;
  for (std::size_t i = 0; i < config.objects.size(); ++i) centres.push_back(pick_centre(rng, config.side));
  const auto occlude = [&](const RasterImage& img, std::size_t object_index) {
    const Centre c =
        config.placement == OccluderPlacement::PerObject ? centres[object_index] : pick_centre(rng, config.side);
    return apply_occlusion(
        img, occlusion_for_fraction(img.width(), img.height(), config.occlusion_fraction, c.x, c.y, config.occlusion_fill));
  };

  std::size_t oi = 0;
  for (const auto& id : config.objects) {
    const auto occluded_train = pick_distinct(rng, views, config.occluded_train_per_object);
    for (std::size_t i = 0; i < views; ++i) {
      const int angle = config.train_angles[i];
      RasterImage img = synth_view(id, angle, config.side, config.seed);
      const bool occ = std::binary_search(occluded_train.begin(), occluded_train.end(), i);
      if (occ) img = occlude(img, oi);
      data.training.push_back({std::move(img), ViewLabel(id, wrap_degrees(angle), occ)});
    }
    ++oi;
  }
  oi = 0;
  for (const auto& id : config.objects) {
    const auto occluded_query = pick_distinct(rng, views, config.occluded_queries_per_object);
    for (std::size_t i = 0; i < views; ++i) {
      const int angle = config.train_angles[i] + config.query_offset_deg;
      RasterImage img = synth_view(id, angle, config.side, config.seed);
      const bool occ = std::binary_search(occluded_query.begin(), occluded_query.end(), i);
      if (occ) img = occlude(img, oi);
      data.queries.push_back({std::move(img), ViewLabel(id, wrap_degrees(angle), occ)});
    }
    ++oi;
  }
  return data;
}

std::vector<AppearanceVector> vectorize_all(const std::vector<LabeledImage>& images, NormMode mode) {
  std::vector<AppearanceVector> out;
  out.reserve(images.size());
  for (const auto& li : images) out.push_back(vectorize(li.image, mode, li.label));
  return out;
}

ProtocolOutcome run_protocol(const ProtocolConfig& config) {
  const ProtocolData data = make_protocol_data(config);
  const NormMode mode = config.eigenspace.norm_mode;

  ObjectRegistry reg;
  ProtocolOutcome outcome;
  for (const auto& id : config.objects) {
    std::vector<AppearanceVector> views;
    for (const auto& li : data.training) {
      if (li.label.object_id == id) views.push_back(vectorize(li.image, mode, li.label));
    }
    outcome.chosen_k.push_back(reg.accumulate(id, views, config.eigenspace)->k());
  }

  std::vector<LabeledQuery> queries;
  queries.reserve(data.queries.size());
  for (const auto& li : data.queries) queries.push_back({vectorize(li.image, mode, li.label), li.label.object_id});
  outcome.report = evaluate(reg, queries, config.recognition);
  return outcome;
}

}  // namespace eigengaze

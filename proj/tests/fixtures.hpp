#pragma once

#include <string>
#include <vector>

#include "eigengaze/imgio.hpp"

namespace fixtures {

inline const std::vector<int> kAngles{0, 10, 20, 30, 40, 50, 60, 70, 80, 90};

// One object's views at `angles`; views whose index is in `occluded` get a
// 15% rectangle centered on the image.
inline std::vector<eigengaze::AppearanceVector> views(const std::string& id, eigengaze::NormMode mode,
                                                      const std::vector<int>& angles = kAngles,
                                                      std::vector<std::size_t> occluded = {}, std::size_t side = 32,
                                                      std::uint64_t seed = 1) {
  std::vector<eigengaze::AppearanceVector> out;
  for (std::size_t i = 0; i < angles.size(); ++i) {
    eigengaze::RasterImage img = eigengaze::synth_view(id, angles[i], side, seed);
    bool occ = false;
    for (auto o : occluded) occ = occ || o == i;
    if (occ) {
      const double c = static_cast<double>(side) / 2.0;
      img = eigengaze::apply_occlusion(img, eigengaze::occlusion_for_fraction(side, side, 0.15, c, c, 0));
    }
    out.push_back(eigengaze::vectorize(img, mode, eigengaze::ViewLabel(id, angles[i] % 360, occ)));
  }
  return out;
}

}  // namespace fixtures

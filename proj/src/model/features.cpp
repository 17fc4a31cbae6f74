#include "rwt/model/features.hpp"

#include <algorithm>

#include "rwt/model/attention.hpp"
#include "rwt/nn/layers.hpp"

namespace rwt::model {

ScoreMap resize_score_map(const ScoreMap& map, int side) {
  if (map.height() == side && map.width() == side) return map;
  const nn::Tensor r = nn::resize_bilinear(to_nchw(map), side, side);
  const std::size_t n = static_cast<std::size_t>(side) * side;
  ScoreMap out(side, side, std::vector<float>(r.data(), r.data() + n),
               std::vector<float>(r.data() + n, r.data() + 2 * n));
  out.clamp_unit();
  return out;
}

std::vector<float> binarized_features(const ScoreMap& map) {
  std::vector<float> out;
  out.reserve(map.cells() * 2);
  out.insert(out.end(), map.region_plane().begin(), map.region_plane().end());
  out.insert(out.end(), map.affinity_plane().begin(), map.affinity_plane().end());
  return out;
}

}  // namespace rwt::model

#pragma once

#include <vector>

#include "rwt/datamodel/types.hpp"

namespace rwt::model {

inline constexpr int kCanonicalMapSide = 112;

// Bilinear resize of both channels to side x side (identity if already there).
ScoreMap resize_score_map(const ScoreMap& map, int side);

// Flattened features for the linear baseline: the region plane row-major,
// then the affinity plane.
std::vector<float> binarized_features(const ScoreMap& map);

}  // namespace rwt::model

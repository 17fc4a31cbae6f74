#pragma once

#include <vector>

#include <json.hpp>

#include "rwt/datamodel/types.hpp"

namespace rwt::scoremap {

// Axis-aligned rectangle in source-image pixels.
struct Box {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;
  friend bool operator==(const Box&, const Box&) = default;
};

// Connected components (8-neighbourhood) of region cells strictly above
// `threshold`, as image-space rectangles. Ordered by first cell in raster
// order. For visualisation only.
std::vector<Box> extract_boxes(const ScoreMap& map, float threshold = 0.8f);

nlohmann::json to_json(const Box& box);

}  // namespace rwt::scoremap

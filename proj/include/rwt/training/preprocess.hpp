#pragma once

#include "rwt/datamodel/types.hpp"

namespace rwt::training {

// Placement of the resized content inside the square canvas.
struct PadGeometry {
  int content_h = 0;
  int content_w = 0;
  int top = 0;
  int left = 0;
};

// Longer side scaled to `side`, shorter side rounded; content centred with the
// odd leftover pixel going to the bottom/right.
PadGeometry pad_geometry(int height, int width, int side);

ImageTensor resize_and_pad(const ImageTensor& image, int target_side);

// Same transform for a score map onto a (side x side) grid.
ScoreMap resize_and_pad(const ScoreMap& map, int target_side);

}  // namespace rwt::training

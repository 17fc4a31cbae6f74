#pragma once

#include "rwt/datamodel/types.hpp"
#include "rwt/scoremap/layout.hpp"

namespace rwt::scoremap {

// Renders a half-resolution score map for an image of `image_height` x
// `image_width` (both even). The region channel is the element-wise max of
// unit-peak isotropic Gaussians at each glyph and decoy centre; the affinity channel
// does the same at the midpoint of each linked pair. `sigma_px` is measured
// in source-image pixels.
//
// A source pixel coordinate p maps to map coordinate (p - 0.5) / 2, the same
// alignment the half-pixel bilinear upsampler inverts.
ScoreMap oracle_render(const CharacterLayout& layout, int image_height,
                       int image_width, double sigma_px);

// Source-pixel to map-cell coordinate.
inline double to_map_coord(double pixel) { return (pixel - 0.5) / 2.0; }

}  // namespace rwt::scoremap

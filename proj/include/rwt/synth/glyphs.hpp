#pragma once

#include <array>
#include <vector>

#include "rwt/datamodel/types.hpp"

namespace rwt::synth {

// Projective map of the plane, row-major 3x3.
struct Homography {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  // Maps the unit square corners (0,0),(1,0),(1,1),(0,1) onto q0..q3.
  static Homography from_unit_square(const std::array<std::array<double, 2>, 4>& q);
  static Homography affine(double sx, double sy, double tx, double ty);

  std::array<double, 2> apply(double x, double y) const;
  Homography inverse() const;
  // this after other: x -> this(other(x)).
  Homography operator*(const Homography& other) const;
};

struct Segment {
  double x0, y0, x1, y1;
};

// Letter-like shapes built from straight strokes inside the unit box (y down).
int glyph_count();
const std::vector<Segment>& glyph_strokes(int index);

using Rgb = std::array<float, 3>;

// Alpha-composites glyph `index` mapped from its unit box by `to_image`.
// `stroke` is the stroke half-width in glyph units and `px_per_unit` an
// estimate of the local scale, used for one-pixel edge antialiasing.
void draw_glyph(ImageTensor& image, int index, const Homography& to_image, double stroke,
                double px_per_unit, const Rgb& color, double alpha);

// Filled convex quadrilateral (corners in order), antialiased by 2x2
// supersampling.
void fill_quad(ImageTensor& image, const std::array<std::array<double, 2>, 4>& q,
               const Rgb& color, double alpha = 1.0);

void fill_disc(ImageTensor& image, double cx, double cy, double radius, const Rgb& color,
               double alpha = 1.0);

// Straight stroke between two image points.
void draw_line(ImageTensor& image, double x0, double y0, double x1, double y1,
               double half_width, const Rgb& color, double alpha = 1.0);

}  // namespace rwt::synth

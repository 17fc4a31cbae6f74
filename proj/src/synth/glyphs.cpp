#include "rwt/synth/glyphs.hpp"

#include <algorithm>
#include <cmath>

namespace rwt::synth {

Homography Homography::from_unit_square(const std::array<std::array<double, 2>, 4>& q) {
  const double x0 = q[0][0], y0 = q[0][1], x1 = q[1][0], y1 = q[1][1];
  const double x2 = q[2][0], y2 = q[2][1], x3 = q[3][0], y3 = q[3][1];
  const double sx = x0 - x1 + x2 - x3, sy = y0 - y1 + y2 - y3;
  double g = 0, h = 0;
  if (std::abs(sx) > 1e-12 || std::abs(sy) > 1e-12) {
    const double dx1 = x1 - x2, dx2 = x3 - x2, dy1 = y1 - y2, dy2 = y3 - y2;
    const double den = dx1 * dy2 - dx2 * dy1;
    if (std::abs(den) < 1e-12) throw Error("degenerate quadrilateral");
    g = (sx * dy2 - dx2 * sy) / den;
    h = (dx1 * sy - sx * dy1) / den;
  }
  Homography H;
  H.m = {x1 - x0 + g * x1, x3 - x0 + h * x3, x0, y1 - y0 + g * y1, y3 - y0 + h * y3, y0,
         g, h, 1};
  return H;
}

Homography Homography::affine(double sx, double sy, double tx, double ty) {
  Homography H;
  H.m = {sx, 0, tx, 0, sy, ty, 0, 0, 1};
  return H;
}

std::array<double, 2> Homography::apply(double x, double y) const {
  const double w = m[6] * x + m[7] * y + m[8];
  return {(m[0] * x + m[1] * y + m[2]) / w, (m[3] * x + m[4] * y + m[5]) / w};
}

Homography Homography::inverse() const {
  const auto& a = m;
  const double c00 = a[4] * a[8] - a[5] * a[7];
  const double c01 = a[5] * a[6] - a[3] * a[8];
  const double c02 = a[3] * a[7] - a[4] * a[6];
  const double det = a[0] * c00 + a[1] * c01 + a[2] * c02;
  if (std::abs(det) < 1e-15) throw Error("singular homography");
  Homography r;
  r.m = {c00 / det,
         (a[2] * a[7] - a[1] * a[8]) / det,
         (a[1] * a[5] - a[2] * a[4]) / det,
         c01 / det,
         (a[0] * a[8] - a[2] * a[6]) / det,
         (a[2] * a[3] - a[0] * a[5]) / det,
         c02 / det,
         (a[1] * a[6] - a[0] * a[7]) / det,
         (a[0] * a[4] - a[1] * a[3]) / det};
  return r;
}

Homography Homography::operator*(const Homography& o) const {
  Homography r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0;
      for (int k = 0; k < 3; ++k) s += m[i * 3 + k] * o.m[k * 3 + j];
      r.m[i * 3 + j] = s;
    }
  return r;
}

namespace {

const std::vector<std::vector<Segment>>& alphabet() {
  static const std::vector<std::vector<Segment>> shapes = {
      {{0, 0, 0, 1}, {0, 0, 1, 0}, {0, .5, .8, .5}, {0, 1, 1, 1}},          // E
      {{0, 0, 0, 1}, {0, 0, 1, 0}, {0, .5, .8, .5}},                        // F
      {{0, 0, 0, 1}, {1, 0, 1, 1}, {0, .5, 1, .5}},                         // H
      {{.5, 0, .5, 1}, {.2, 0, .8, 0}, {.2, 1, .8, 1}},                     // I
      {{0, 0, 0, 1}, {0, 1, 1, 1}},                                         // L
      {{0, 0, 1, 0}, {.5, 0, .5, 1}},                                       // T
      {{0, 1, .5, 0}, {.5, 0, 1, 1}, {.25, .55, .75, .55}},                 // A
      {{0, 0, .5, 1}, {.5, 1, 1, 0}},                                       // V
      {{0, 0, .25, 1}, {.25, 1, .5, .4}, {.5, .4, .75, 1}, {.75, 1, 1, 0}},  // W
      {{0, 1, 0, 0}, {0, 0, .5, .6}, {.5, .6, 1, 0}, {1, 0, 1, 1}},          // M
      {{0, 1, 0, 0}, {0, 0, 1, 1}, {1, 1, 1, 0}},                           // N
      {{0, 0, 1, 0}, {1, 0, 0, 1}, {0, 1, 1, 1}},                           // Z
      {{0, 0, 0, 1}, {0, .5, 1, 0}, {.3, .35, 1, 1}},                       // K
      {{0, 0, 1, 1}, {1, 0, 0, 1}},                                         // X
      {{0, 0, .5, .5}, {1, 0, .5, .5}, {.5, .5, .5, 1}},                    // Y
      {{.3, 0, .7, 0}, {.7, 0, 1, .3}, {1, .3, 1, .7}, {1, .7, .7, 1},
       {.7, 1, .3, 1}, {.3, 1, 0, .7}, {0, .7, 0, .3}, {0, .3, .3, 0}},     // O
      {{1, 0, .3, 0}, {.3, 0, 0, .3}, {0, .3, 0, .7}, {0, .7, .3, 1},
       {.3, 1, 1, 1}},                                                      // C
      {{0, 0, 0, .7}, {0, .7, .3, 1}, {.3, 1, .7, 1}, {.7, 1, 1, .7},
       {1, .7, 1, 0}},                                                      // U
      {{0, 1, 0, 0}, {0, 0, .8, 0}, {.8, 0, 1, .25}, {1, .25, .8, .5},
       {.8, .5, 0, .5}},                                                    // P
      {{1, 0, 0, 0}, {0, 0, 0, .5}, {0, .5, 1, .5}, {1, .5, 1, 1},
       {1, 1, 0, 1}},                                                       // S
  };
  return shapes;
}

double segment_distance(double px, double py, const Segment& s) {
  const double vx = s.x1 - s.x0, vy = s.y1 - s.y0;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0 ? ((px - s.x0) * vx + (py - s.y0) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double dx = px - (s.x0 + t * vx), dy = py - (s.y0 + t * vy);
  return std::sqrt(dx * dx + dy * dy);
}

void blend(ImageTensor& image, int x, int y, const Rgb& color, double a) {
  if (a <= 0) return;
  a = std::min(a, 1.0);
  for (int c = 0; c < 3; ++c) {
    float& v = image.at(y, x, c);
    v = static_cast<float>((1.0 - a) * v + a * color[c]);
  }
}

}  // namespace

int glyph_count() { return static_cast<int>(alphabet().size()); }

const std::vector<Segment>& glyph_strokes(int index) {
  if (index < 0 || index >= glyph_count()) throw Error("glyph index out of range");
  return alphabet()[index];
}

void draw_glyph(ImageTensor& image, int index, const Homography& to_image, double stroke,
                double px_per_unit, const Rgb& color, double alpha) {
  const auto& strokes = glyph_strokes(index);
  const Homography inv = to_image.inverse();
  double x_lo = 1e30, x_hi = -1e30, y_lo = 1e30, y_hi = -1e30;
  for (double u : {-stroke, 1 + stroke})
    for (double v : {-stroke, 1 + stroke}) {
      const auto p = to_image.apply(u, v);
      x_lo = std::min(x_lo, p[0]);
      x_hi = std::max(x_hi, p[0]);
      y_lo = std::min(y_lo, p[1]);
      y_hi = std::max(y_hi, p[1]);
    }
  const int x0 = std::max(0, static_cast<int>(std::floor(x_lo)) - 1);
  const int x1 = std::min(image.width() - 1, static_cast<int>(std::ceil(x_hi)) + 1);
  const int y0 = std::max(0, static_cast<int>(std::floor(y_lo)) - 1);
  const int y1 = std::min(image.height() - 1, static_cast<int>(std::ceil(y_hi)) + 1);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const auto uv = inv.apply(x, y);
      double d = 1e30;
      for (const auto& s : strokes) d = std::min(d, segment_distance(uv[0], uv[1], s));
      const double cover = std::clamp(0.5 + (stroke - d) * px_per_unit, 0.0, 1.0);
      blend(image, x, y, color, alpha * cover);
    }
}

void fill_quad(ImageTensor& image, const std::array<std::array<double, 2>, 4>& q,
               const Rgb& color, double alpha) {
  double x_lo = 1e30, x_hi = -1e30, y_lo = 1e30, y_hi = -1e30;
  for (const auto& p : q) {
    x_lo = std::min(x_lo, p[0]);
    x_hi = std::max(x_hi, p[0]);
    y_lo = std::min(y_lo, p[1]);
    y_hi = std::max(y_hi, p[1]);
  }
  // Orientation-agnostic inside test on a convex polygon.
  auto inside = [&](double x, double y) {
    int sign = 0;
    for (int i = 0; i < 4; ++i) {
      const auto& a = q[i];
      const auto& b = q[(i + 1) % 4];
      const double cr = (b[0] - a[0]) * (y - a[1]) - (b[1] - a[1]) * (x - a[0]);
      const int s = cr > 0 ? 1 : (cr < 0 ? -1 : 0);
      if (s == 0) continue;
      if (sign == 0) sign = s;
      else if (s != sign) return false;
    }
    return true;
  };
  const int x0 = std::max(0, static_cast<int>(std::floor(x_lo)));
  const int x1 = std::min(image.width() - 1, static_cast<int>(std::ceil(x_hi)));
  const int y0 = std::max(0, static_cast<int>(std::floor(y_lo)));
  const int y1 = std::min(image.height() - 1, static_cast<int>(std::ceil(y_hi)));
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      int hits = 0;
      for (double dy : {-0.25, 0.25})
        for (double dx : {-0.25, 0.25}) hits += inside(x + dx, y + dy);
      blend(image, x, y, color, alpha * hits / 4.0);
    }
}

void fill_disc(ImageTensor& image, double cx, double cy, double radius, const Rgb& color,
               double alpha) {
  const int x0 = std::max(0, static_cast<int>(std::floor(cx - radius)) - 1);
  const int x1 = std::min(image.width() - 1, static_cast<int>(std::ceil(cx + radius)) + 1);
  const int y0 = std::max(0, static_cast<int>(std::floor(cy - radius)) - 1);
  const int y1 = std::min(image.height() - 1, static_cast<int>(std::ceil(cy + radius)) + 1);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const double d = std::hypot(x - cx, y - cy);
      blend(image, x, y, color, alpha * std::clamp(0.5 + radius - d, 0.0, 1.0));
    }
}

void draw_line(ImageTensor& image, double x0, double y0, double x1, double y1,
               double half_width, const Rgb& color, double alpha) {
  const Segment s{x0, y0, x1, y1};
  const int xa = std::max(0, static_cast<int>(std::floor(std::min(x0, x1) - half_width)) - 1);
  const int xb = std::min(image.width() - 1,
                          static_cast<int>(std::ceil(std::max(x0, x1) + half_width)) + 1);
  const int ya = std::max(0, static_cast<int>(std::floor(std::min(y0, y1) - half_width)) - 1);
  const int yb = std::min(image.height() - 1,
                          static_cast<int>(std::ceil(std::max(y0, y1) + half_width)) + 1);
  for (int y = ya; y <= yb; ++y)
    for (int x = xa; x <= xb; ++x) {
      const double d = segment_distance(x, y, s);
      blend(image, x, y, color, alpha * std::clamp(0.5 + half_width - d, 0.0, 1.0));
    }
}

}  // namespace rwt::synth

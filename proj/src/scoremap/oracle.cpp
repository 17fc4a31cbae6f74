#include "rwt/scoremap/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rwt::scoremap {

namespace {

void splat_max(std::vector<float>& plane, int h, int w, double cx, double cy,
               double sigma) {
  const double inv = 1.0 / (2.0 * sigma * sigma);
  for (int i = 0; i < h; ++i) {
    const double dy = i - cy;
    for (int j = 0; j < w; ++j) {
      const double dx = j - cx;
      const auto v = static_cast<float>(std::exp(-(dx * dx + dy * dy) * inv));
      float& cell = plane[static_cast<std::size_t>(i) * w + j];
      cell = std::max(cell, v);
    }
  }
}

}  // namespace

ScoreMap oracle_render(const CharacterLayout& layout, int image_height,
                       int image_width, double sigma_px) {
  if (!(sigma_px > 0.0)) throw Error("oracle sigma must be positive");
  ScoreMap map = ScoreMap::for_image(image_height, image_width);
  const double sigma = sigma_px / 2.0;
  const int h = map.height(), w = map.width();
  auto splat_all = [&](const std::vector<GlyphCenter>& centres) {
    for (const auto& g : centres) {
      if (g.center_x < 0 || g.center_x >= image_width || g.center_y < 0 ||
          g.center_y >= image_height) {
        throw Error("glyph centre (" + std::to_string(g.center_x) + ", " +
                    std::to_string(g.center_y) + ") lies outside the image");
      }
      if (!(g.scale > 0.0)) throw Error("glyph scale must be positive");
      splat_max(map.region_plane(), h, w, to_map_coord(g.center_x),
                to_map_coord(g.center_y), sigma);
    }
  };
  splat_all(layout.glyphs);
  splat_all(layout.decoys);
  const int n = static_cast<int>(layout.glyphs.size());
  for (const auto& [a, b] : layout.links) {
    if (a < 0 || b < 0 || a >= n || b >= n) throw Error("affinity link index out of range");
    const auto& ga = layout.glyphs[a];
    const auto& gb = layout.glyphs[b];
    splat_max(map.affinity_plane(), h, w,
              to_map_coord((ga.center_x + gb.center_x) / 2.0),
              to_map_coord((ga.center_y + gb.center_y) / 2.0), sigma);
  }
  return map;
}

}  // namespace rwt::scoremap

#pragma once

#include <utility>
#include <vector>

#include <json.hpp>

namespace rwt::scoremap {

enum class GlyphKind { kScene, kOverlay };

// Glyph centres use pixel-index coordinates: pixel (x, y) is centred at
// (x, y), so valid centres lie in [0, width) x [0, height).
struct GlyphCenter {
  double center_x = 0.0;
  double center_y = 0.0;
  double scale = 1.0;
  GlyphKind kind = GlyphKind::kScene;

  friend bool operator==(const GlyphCenter&, const GlyphCenter&) = default;
};

struct CharacterLayout {
  std::vector<GlyphCenter> glyphs;
  // Index pairs into `glyphs` for adjacent characters of one word.
  std::vector<std::pair<int, int>> links;
  // Spots where a character detector fires on letter-like decor. Not text;
  // `kind` is ignored.
  std::vector<GlyphCenter> decoys;

  bool has_kind(GlyphKind kind) const;
  friend bool operator==(const CharacterLayout&, const CharacterLayout&) = default;
};

nlohmann::json to_json(const CharacterLayout& layout);
CharacterLayout layout_from_json(const nlohmann::json& j);

}  // namespace rwt::scoremap

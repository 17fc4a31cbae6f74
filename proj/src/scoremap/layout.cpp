#include "rwt/scoremap/layout.hpp"

#include <algorithm>
#include <string>

#include "rwt/datamodel/types.hpp"

namespace rwt::scoremap {

bool CharacterLayout::has_kind(GlyphKind kind) const {
  return std::any_of(glyphs.begin(), glyphs.end(),
                     [kind](const GlyphCenter& g) { return g.kind == kind; });
}

nlohmann::json to_json(const CharacterLayout& layout) {
  nlohmann::json glyphs = nlohmann::json::array();
  for (const auto& g : layout.glyphs) {
    glyphs.push_back({{"center_x", g.center_x},
                      {"center_y", g.center_y},
                      {"scale", g.scale},
                      {"kind", g.kind == GlyphKind::kOverlay ? "overlay" : "scene"}});
  }
  nlohmann::json links = nlohmann::json::array();
  for (const auto& [a, b] : layout.links) links.push_back({a, b});
  nlohmann::json out = {{"glyphs", glyphs}, {"links", links}};
  if (!layout.decoys.empty()) {
    nlohmann::json decoys = nlohmann::json::array();
    for (const auto& d : layout.decoys) {
      decoys.push_back({{"center_x", d.center_x}, {"center_y", d.center_y}, {"scale", d.scale}});
    }
    out["decoys"] = decoys;
  }
  return out;
}

CharacterLayout layout_from_json(const nlohmann::json& j) {
  CharacterLayout layout;
  for (const auto& g : j.at("glyphs")) {
    const auto kind = g.at("kind").get<std::string>();
    if (kind != "overlay" && kind != "scene") throw Error("unknown glyph kind '" + kind + "'");
    layout.glyphs.push_back({g.at("center_x").get<double>(), g.at("center_y").get<double>(),
                             g.at("scale").get<double>(),
                             kind == "overlay" ? GlyphKind::kOverlay : GlyphKind::kScene});
  }
  for (const auto& l : j.value("links", nlohmann::json::array())) {
    layout.links.emplace_back(l.at(0).get<int>(), l.at(1).get<int>());
  }
  for (const auto& d : j.value("decoys", nlohmann::json::array())) {
    layout.decoys.push_back({d.at("center_x").get<double>(), d.at("center_y").get<double>(),
                             d.at("scale").get<double>(), GlyphKind::kScene});
  }
  return layout;
}

}  // namespace rwt::scoremap

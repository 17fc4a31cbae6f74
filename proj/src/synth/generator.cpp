#include "rwt/synth/generator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/format.h>
#include <opencv2/imgproc.hpp>

#include "rwt/annotation/aggregate.hpp"
#include "rwt/datamodel/image_io.hpp"
#include "rwt/datamodel/tensor_io.hpp"
#include "rwt/datamodel/votes.hpp"
#include "rwt/scoremap/oracle.hpp"
#include "rwt/synth/glyphs.hpp"

namespace rwt::synth {

using scoremap::GlyphCenter;
using scoremap::GlyphKind;
using Quad = std::array<std::array<double, 2>, 4>;

void SyntheticSpec::validate() const {
  if (image_side < 32 || image_side % 2 != 0) throw Error("image_side must be even and >= 32");
  double sum = 0;
  for (double p : class_mix) {
    if (p < 0) throw Error("class_mix entries must be non-negative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6) throw Error("class_mix must sum to 1");
  if (!(overlay.opacity.lo > 0 && overlay.opacity.lo <= overlay.opacity.hi &&
        overlay.opacity.hi <= 1)) {
    throw Error("overlay opacity must lie in (0,1]");
  }
  if (!(overlay.font_scale.lo > 0 && overlay.font_scale.lo <= overlay.font_scale.hi &&
        overlay.font_scale.hi < 0.5)) {
    throw Error("overlay font_scale must lie in (0,0.5)");
  }
  auto check_count = [](std::pair<int, int> c, const char* what) {
    if (c.first < 1 || c.first > c.second) throw Error(fmt::format("bad {} glyph count", what));
  };
  check_count(overlay.glyphs, "overlay");
  check_count(scene_text.glyphs, "scene");
  if (!(scene_text.tilt.lo >= 0 && scene_text.tilt.lo <= scene_text.tilt.hi &&
        scene_text.tilt.hi < 1.5)) {
    throw Error("scene tilt must be an increasing range in [0, 1.5) radians");
  }
  if (scene_text.occlusion_probability < 0 || scene_text.occlusion_probability > 1) {
    throw Error("occlusion_probability must lie in [0,1]");
  }
  if (background.furniture.first < 0 || background.furniture.first > background.furniture.second) {
    throw Error("bad furniture count");
  }
  if (!(oracle_sigma_px > 0)) throw Error("oracle_sigma_px must be positive");
  if (graphics_probability < 0 || graphics_probability > 1) {
    throw Error("graphics_probability must lie in [0,1]");
  }
  if (camera_blur_px < 0 || background.noise < 0) throw Error("camera blur and noise must be >= 0");
}

nlohmann::json to_json(const SyntheticSpec& s) {
  return {{"image_side", s.image_side},
          {"class_mix",
           {{"overlaying", s.class_mix[0]},
            {"organic", s.class_mix[1]},
            {"both", s.class_mix[2]},
            {"none", s.class_mix[3]}}},
          {"overlay",
           {{"font_scale", {s.overlay.font_scale.lo, s.overlay.font_scale.hi}},
            {"opacity", {s.overlay.opacity.lo, s.overlay.opacity.hi}},
            {"glyphs", {s.overlay.glyphs.first, s.overlay.glyphs.second}},
            {"placement", "uniform"}}},
          {"scene_text",
           {{"perspective", s.scene_text.perspective},
            {"tilt", {s.scene_text.tilt.lo, s.scene_text.tilt.hi}},
            {"occlusion_probability", s.scene_text.occlusion_probability},
            {"glyphs", {s.scene_text.glyphs.first, s.scene_text.glyphs.second}}}},
          {"background",
           {{"furniture", {s.background.furniture.first, s.background.furniture.second}},
            {"window_probability", s.background.window_probability},
            {"distractor_probability", s.background.distractor_probability},
            {"decoy_response_probability", s.background.decoy_response_probability},
            {"noise", s.background.noise}}},
          {"graphics_probability", s.graphics_probability},
          {"camera_blur_px", s.camera_blur_px},
          {"oracle_sigma_px", s.oracle_sigma_px},
          {"seed", s.seed}};
}

SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j) {
  SyntheticSpec s;
  try {
    s.image_side = j.value("image_side", s.image_side);
    if (j.contains("class_mix")) {
      const auto& m = j.at("class_mix");
      s.class_mix = {0, 0, 0, 0};
      for (const auto& [key, value] : m.items()) {
        s.class_mix[static_cast<int>(parse_text_class(key))] = value.get<double>();
      }
    }
    auto range = [](const nlohmann::json& v) { return Range{v.at(0), v.at(1)}; };
    auto count = [](const nlohmann::json& v) {
      return std::pair<int, int>{v.at(0), v.at(1)};
    };
    if (j.contains("overlay")) {
      const auto& o = j.at("overlay");
      if (o.contains("font_scale")) s.overlay.font_scale = range(o.at("font_scale"));
      if (o.contains("opacity")) s.overlay.opacity = range(o.at("opacity"));
      if (o.contains("glyphs")) s.overlay.glyphs = count(o.at("glyphs"));
      if (o.value("placement", std::string("uniform")) != "uniform") {
        throw Error("only uniform overlay placement is supported");
      }
    }
    if (j.contains("scene_text")) {
      const auto& t = j.at("scene_text");
      s.scene_text.perspective = t.value("perspective", s.scene_text.perspective);
      if (t.contains("tilt")) s.scene_text.tilt = range(t.at("tilt"));
      s.scene_text.occlusion_probability =
          t.value("occlusion_probability", s.scene_text.occlusion_probability);
      if (t.contains("glyphs")) s.scene_text.glyphs = count(t.at("glyphs"));
    }
    if (j.contains("background")) {
      const auto& b = j.at("background");
      if (b.contains("furniture")) s.background.furniture = count(b.at("furniture"));
      s.background.window_probability =
          b.value("window_probability", s.background.window_probability);
      s.background.distractor_probability =
          b.value("distractor_probability", s.background.distractor_probability);
      s.background.noise = b.value("noise", s.background.noise);
      s.background.decoy_response_probability =
          b.value("decoy_response_probability", s.background.decoy_response_probability);
    }
    s.oracle_sigma_px = j.value("oracle_sigma_px", s.oracle_sigma_px);
    s.camera_blur_px = j.value("camera_blur_px", s.camera_blur_px);
    s.graphics_probability = j.value("graphics_probability", s.graphics_probability);
    s.seed = j.value("seed", s.seed);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("bad synthetic spec: ") + e.what());
  }
  s.validate();
  return s;
}

std::mt19937_64 example_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

namespace {

struct Sampler {
  std::mt19937_64& rng;
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  double uniform(Range r) { return r.lo == r.hi ? r.lo : uniform(r.lo, r.hi); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
  int integer(std::pair<int, int> r) { return integer(r.first, r.second); }
  bool chance(double p) { return uniform(0.0, 1.0) < p; }
  Rgb color(double lo, double hi) {
    return {static_cast<float>(uniform(lo, hi)), static_cast<float>(uniform(lo, hi)),
            static_cast<float>(uniform(lo, hi))};
  }
  Rgb tinted(double base, double spread) {
    Rgb c;
    for (auto& v : c) v = static_cast<float>(std::clamp(base + uniform(-spread, spread), 0.0, 1.0));
    return c;
  }
};

Quad rect(double x0, double y0, double x1, double y1) {
  return {{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}};
}

void paint_room(ImageTensor& img, scoremap::CharacterLayout& layout, const SyntheticSpec& spec,
                Sampler& s) {
  const int side = spec.image_side;
  const Rgb wall = s.tinted(s.uniform(0.45, 0.85), 0.12);
  const Rgb floor = s.tinted(s.uniform(0.2, 0.55), 0.1);
  const double horizon = s.uniform(0.55, 0.8) * side;
  for (int y = 0; y < side; ++y) {
    const bool on_floor = y >= horizon;
    const double shade = on_floor ? 0.85 + 0.15 * (y - horizon) / (side - horizon + 1)
                                  : 1.0 - 0.15 * y / horizon;
    const Rgb& base = on_floor ? floor : wall;
    for (int x = 0; x < side; ++x)
      for (int c = 0; c < 3; ++c) img.at(y, x, c) = static_cast<float>(base[c] * shade);
  }
  // Floor planks.
  const double plank = s.uniform(0.06, 0.12) * side;
  for (double y = horizon + plank; y < side; y += plank) {
    draw_line(img, 0, y, side - 1, y, 0.4, s.tinted(floor[0] * 0.7, 0.05), 0.6);
  }
  if (s.chance(spec.background.window_probability)) {
    const double w = s.uniform(0.18, 0.35) * side, h = s.uniform(0.2, 0.35) * side;
    const double x = s.uniform(0, side - w), y = s.uniform(0, std::max(1.0, horizon - h));
    fill_quad(img, rect(x, y, x + w, y + h), s.tinted(0.92, 0.05));
    const Rgb frame = s.tinted(s.uniform(0.2, 0.9), 0.05);
    draw_line(img, x + w / 2, y, x + w / 2, y + h, 0.6, frame);
    draw_line(img, x, y + h / 2, x + w, y + h / 2, 0.6, frame);
  }
  const int furniture = s.integer(spec.background.furniture);
  for (int i = 0; i < furniture; ++i) {
    const double w = s.uniform(0.15, 0.45) * side, h = s.uniform(0.12, 0.35) * side;
    const double x = s.uniform(-0.1 * side, side - 0.9 * w);
    const double y = std::min(s.uniform(horizon - h, horizon + 0.1 * side), side - h * 0.5);
    const Rgb body = s.color(0.1, 0.8);
    fill_quad(img, rect(x, y, x + w, y + h), body);
    Rgb top = body;
    for (auto& v : top) v = std::min(1.0f, v * 1.25f + 0.05f);
    fill_quad(img, rect(x, y, x + w, y + 0.15 * h), top);
  }
  if (s.chance(spec.background.distractor_probability)) {
    // Decorative strokes that are not characters: patterns on cushions, rugs,
    // picture frames.
    const int strokes = s.integer(2, 6);
    const double cx = s.uniform(0.15, 0.85) * side, cy = s.uniform(0.15, 0.85) * side;
    const double extent = s.uniform(0.08, 0.2) * side;
    const Rgb c = s.chance(0.5) ? s.color(0.0, 1.0) : s.tinted(s.chance(0.5) ? 0.95 : 0.05, 0.05);
    const bool fires = s.chance(spec.background.decoy_response_probability);
    for (int i = 0; i < strokes; ++i) {
      const double xa = cx + s.uniform(-extent, extent), ya = cy + s.uniform(-extent, extent);
      const double xb = cx + s.uniform(-extent, extent), yb = cy + s.uniform(-extent, extent);
      draw_line(img, xa, ya, xb, yb, s.uniform(0.4, 0.9), c, s.uniform(0.5, 1.0));
      const double mx = (xa + xb) / 2, my = (ya + yb) / 2;
      if (fires && i % 2 == 0 && mx >= 0 && my >= 0 && mx < side && my < side) {
        layout.decoys.push_back(GlyphCenter{mx, my, extent, GlyphKind::kScene});
      }
    }
  }
}

// A text row of `n` glyphs occupying [x0, x0 + n * advance] x [y0, y0 + h] in
// some frame, returned as unit-box maps into that frame.
std::vector<Homography> text_row(int n, double x0, double y0, double h, double advance) {
  std::vector<Homography> out;
  for (int i = 0; i < n; ++i) {
    out.push_back(Homography::affine(0.7 * h, h, x0 + i * advance + 0.15 * h, y0));
  }
  return out;
}

void add_links(scoremap::CharacterLayout& layout, std::size_t first) {
  for (std::size_t i = first; i + 1 < layout.glyphs.size(); ++i) {
    layout.links.emplace_back(static_cast<int>(i), static_cast<int>(i + 1));
  }
}

bool in_quad(const Quad& q, double x, double y) {
  int sign = 0;
  for (int i = 0; i < 4; ++i) {
    const auto& a = q[i];
    const auto& b = q[(i + 1) % 4];
    const double cr = (b[0] - a[0]) * (y - a[1]) - (b[1] - a[1]) * (x - a[0]);
    const int sg = cr > 0 ? 1 : -1;
    if (sign == 0) sign = sg;
    else if (sg != sign) return false;
  }
  return true;
}

void paint_scene_text(ImageTensor& img, scoremap::CharacterLayout& layout,
                      const SyntheticSpec& spec, Sampler& s) {
  const int side = spec.image_side;
  const double pw = s.uniform(0.4, 0.7) * side, ph = s.uniform(0.22, 0.35) * side;
  const double px = s.uniform(0.02 * side, side - pw - 0.02 * side);
  const double py = s.uniform(0.02 * side, side - ph - 0.02 * side);
  Quad q = rect(px, py, px + pw, py + ph);
  if (spec.scene_text.perspective) {
    // Rotate about the centre, then jitter corners for a projective tilt.
    // Never axis-aligned: a visible tilt separates it from overlay rows.
    const double ang = s.uniform(spec.scene_text.tilt) * (s.chance(0.5) ? 1 : -1);
    const double cx = px + pw / 2, cy = py + ph / 2;
    for (auto& p : q) {
      const double dx = p[0] - cx, dy = p[1] - cy;
      p[0] = cx + dx * std::cos(ang) - dy * std::sin(ang) + s.uniform(-0.1, 0.1) * pw;
      p[1] = cy + dx * std::sin(ang) + dy * std::cos(ang) + s.uniform(-0.12, 0.12) * ph;
    }
  }
  const bool dark_panel = s.chance(0.3);
  const Rgb panel = dark_panel ? s.tinted(0.15, 0.1) : s.tinted(0.85, 0.1);
  const Rgb ink = dark_panel ? s.tinted(0.85, 0.1) : s.color(0.0, 0.35);
  fill_quad(img, q, panel);
  // Picture frame edge.
  for (int i = 0; i < 4; ++i) {
    draw_line(img, q[i][0], q[i][1], q[(i + 1) % 4][0], q[(i + 1) % 4][1], 0.5,
              s.tinted(0.3, 0.1));
  }

  const Homography poster = Homography::from_unit_square(q);
  const int n = s.integer(spec.scene_text.glyphs);
  const double margin = 0.08;
  const double advance = (1.0 - 2 * margin) / n;
  // Glyph height in poster units, preserving a rough aspect against pw/ph.
  const double gh = std::min(0.7, advance / 0.85 * pw / ph);
  const double gy = s.uniform(0.1, std::max(0.1, 0.9 - gh));
  const double gw = 0.7 * gh * ph / pw;
  const double stroke = 0.09;
  const double px_per_unit = gh * ph;

  Quad occluder{};
  const bool occluded = s.chance(spec.scene_text.occlusion_probability);
  if (occluded) {
    // Covers up to a third of the poster from one side.
    const double frac = s.uniform(0.15, 0.35);
    const bool left = s.chance(0.5);
    const double x0 = left ? px - 0.2 * pw : px + (1 - frac) * pw;
    const double x1 = left ? px + frac * pw : px + 1.2 * pw;
    const double y0 = py + s.uniform(0.0, 0.4) * ph;
    occluder = rect(x0, y0, x1, std::min<double>(side, py + 1.5 * ph));
  }

  const std::size_t first = layout.glyphs.size();
  for (int i = 0; i < n; ++i) {
    const double ux = margin + i * advance + (advance - gw) / 2;
    const Homography to_image = poster * Homography::affine(gw, gh, ux, gy);
    const int glyph = s.integer(0, glyph_count() - 1);
    draw_glyph(img, glyph, to_image, stroke, px_per_unit, ink, 1.0);
    const auto c = to_image.apply(0.5, 0.5);
    if (occluded && in_quad(occluder, c[0], c[1])) continue;
    if (c[0] < 0 || c[1] < 0 || c[0] >= side || c[1] >= side) continue;
    layout.glyphs.push_back(GlyphCenter{c[0], c[1], gh * ph, GlyphKind::kScene});
  }
  if (occluded) {
    const Rgb body = s.color(0.1, 0.7);
    fill_quad(img, occluder, body);
  }
  if (layout.glyphs.size() == first) {
    // Everything hidden: keep one visible character by construction.
    const double ux = margin + (n / 2) * advance + (advance - gw) / 2;
    const Homography to_image = poster * Homography::affine(gw, gh, ux, gy);
    const auto c = to_image.apply(0.5, 0.5);
    const double cx = std::clamp(c[0], 0.0, side - 1.0), cy = std::clamp(c[1], 0.0, side - 1.0);
    draw_glyph(img, s.integer(0, glyph_count() - 1),
               Homography::affine(1, 1, cx - c[0], cy - c[1]) * to_image, stroke, px_per_unit,
               ink, 1.0);
    layout.glyphs.push_back(GlyphCenter{cx, cy, gh * ph, GlyphKind::kScene});
  }
  add_links(layout, first);
}

void paint_overlay_text(ImageTensor& img, scoremap::CharacterLayout& layout,
                        const SyntheticSpec& spec, Sampler& s) {
  const int side = spec.image_side;
  const double h = s.uniform(spec.overlay.font_scale) * side;
  const double advance = 0.85 * h;
  int n = s.integer(spec.overlay.glyphs);
  n = std::max(1, std::min(n, static_cast<int>((side - 2) / advance)));
  const double width = n * advance;
  const double x0 = s.uniform(1.0, side - 1.0 - width);
  const double y0 = s.uniform(1.0, side - 1.0 - h);
  // Ink contrasts with whatever lies underneath the text box.
  double lum = 0;
  int count = 0;
  for (int y = static_cast<int>(y0); y < std::min(side, static_cast<int>(y0 + h) + 1); ++y)
    for (int x = static_cast<int>(x0); x < std::min(side, static_cast<int>(x0 + width) + 1); ++x) {
      lum += (img.at(y, x, 0) + img.at(y, x, 1) + img.at(y, x, 2)) / 3.0;
      ++count;
    }
  lum /= std::max(count, 1);
  Rgb color = lum > 0.5 ? s.tinted(0.05, 0.05) : s.tinted(0.95, 0.05);
  if (s.chance(0.3)) {
    // Saturated brand colour, pushed away from the background luminance.
    color = s.color(0.0, 1.0);
    const int hot = s.integer(0, 2);
    color[hot] = lum > 0.5 ? 0.1f : 1.0f;
    for (int c = 0; c < 3; ++c)
      if (c != hot) color[c] = lum > 0.5 ? color[c] * 0.3f : 0.5f + color[c] * 0.5f;
  }
  const double alpha = s.uniform(spec.overlay.opacity);
  const std::size_t first = layout.glyphs.size();
  for (const auto& to_image : text_row(n, x0, y0, h, advance)) {
    draw_glyph(img, s.integer(0, glyph_count() - 1), to_image, 0.1, h, color, alpha);
    const auto c = to_image.apply(0.5, 0.5);
    layout.glyphs.push_back(GlyphCenter{c[0], c[1], h, GlyphKind::kOverlay});
  }
  add_links(layout, first);
}

void paint_graphics(ImageTensor& img, const SyntheticSpec& spec, Sampler& s) {
  const int side = spec.image_side;
  const int items = s.integer(1, 2);
  for (int i = 0; i < items; ++i) {
    const Rgb c = s.chance(0.5) ? s.tinted(s.chance(0.5) ? 0.97 : 0.03, 0.03) : s.color(0.0, 1.0);
    const double alpha = s.uniform(0.6, 1.0);
    switch (s.integer(0, 2)) {
      case 0: {  // collage border
        const double t = s.uniform(0.6, 2.0);
        const double m = s.uniform(0.0, 0.08) * side;
        const double a = m, b = side - 1 - m;
        draw_line(img, a, a, b, a, t, c, alpha);
        draw_line(img, b, a, b, b, t, c, alpha);
        draw_line(img, b, b, a, b, t, c, alpha);
        draw_line(img, a, b, a, a, t, c, alpha);
        break;
      }
      case 1: {  // colour swatches
        const int n = s.integer(2, 5);
        const double r = s.uniform(0.03, 0.06) * side;
        const bool vertical = s.chance(0.5);
        const double x0 = s.uniform(r + 1, side - r - 1 - (vertical ? 0 : (n - 1) * 2.6 * r));
        const double y0 = s.uniform(r + 1, side - r - 1 - (vertical ? (n - 1) * 2.6 * r : 0));
        for (int k = 0; k < n; ++k) {
          const double off = k * 2.6 * r;
          fill_disc(img, vertical ? x0 : x0 + off, vertical ? y0 + off : y0, r, s.color(0, 1),
                    alpha);
        }
        break;
      }
      default: {  // badge: a filled shape with a geometric mark
        const double w = s.uniform(0.1, 0.22) * side, h = s.uniform(0.08, 0.16) * side;
        const double x = s.uniform(1, side - w - 1), y = s.uniform(1, side - h - 1);
        fill_quad(img, {{{x, y}, {x + w, y}, {x + w, y + h}, {x, y + h}}}, c, alpha);
        const Rgb mark = c[0] + c[1] + c[2] > 1.5 ? Rgb{0, 0, 0} : Rgb{1, 1, 1};
        if (s.chance(0.5)) {
          fill_disc(img, x + w / 2, y + h / 2, 0.3 * h, mark, alpha);
        } else {
          draw_line(img, x + 0.2 * w, y + h / 2, x + 0.8 * w, y + h / 2, 0.7, mark, alpha);
          draw_line(img, x + 0.8 * w, y + h / 2, x + 0.6 * w, y + 0.25 * h, 0.7, mark, alpha);
          draw_line(img, x + 0.8 * w, y + h / 2, x + 0.6 * w, y + 0.75 * h, 0.7, mark, alpha);
        }
        break;
      }
    }
  }
}

TextClass sample_class(const SyntheticSpec& spec, Sampler& s) {
  bool any = false;
  for (double p : spec.class_mix) any = any || p > 0;
  if (!any) throw Error("class_mix has empty support");
  std::discrete_distribution<int> d(spec.class_mix.begin(), spec.class_mix.end());
  return static_cast<TextClass>(d(s.rng));
}

}  // namespace

SyntheticExample generate_example(const SyntheticSpec& spec, std::mt19937_64& rng) {
  spec.validate();
  Sampler s{rng};
  SyntheticExample ex;
  ex.label = sample_class(spec, s);
  ex.image = ImageTensor(spec.image_side, spec.image_side);
  paint_room(ex.image, ex.layout, spec, s);
  if (ex.label == TextClass::kOrganic || ex.label == TextClass::kBoth) {
    paint_scene_text(ex.image, ex.layout, spec, s);
  }
  // Camera: optics and sensor act on the physical scene only.
  if (spec.camera_blur_px > 0) {
    cv::Mat m(spec.image_side, spec.image_side, CV_32FC3, ex.image.values().data());
    cv::GaussianBlur(m, m, cv::Size(0, 0), spec.camera_blur_px, spec.camera_blur_px,
                     cv::BORDER_REFLECT);
  }
  if (spec.background.noise > 0) {
    std::normal_distribution<float> noise(0.0f, static_cast<float>(spec.background.noise));
    for (float& v : ex.image.values()) v = std::clamp(v + noise(rng), 0.0f, 1.0f);
  }
  // Post-processing: graphics, then any overlay text.
  if (s.chance(spec.graphics_probability)) paint_graphics(ex.image, spec, s);
  if (ex.label == TextClass::kOverlaying || ex.label == TextClass::kBoth) {
    paint_overlay_text(ex.image, ex.layout, spec, s);
  }
  return ex;
}

DatasetManifest generate_corpus(const SyntheticSpec& spec, int n,
                                const std::filesystem::path& out_dir,
                                const std::string& id_prefix) {
  spec.validate();
  if (n < 1) throw Error("corpus size must be at least 1");
  namespace fs = std::filesystem;
  for (const char* sub : {"images", "scoremaps", "layouts"}) fs::create_directories(out_dir / sub);

  DatasetManifest manifest;
  std::vector<VoteRecord> votes;
  const auto& categories = product_categories();
  for (int i = 0; i < n; ++i) {
    std::mt19937_64 rng = example_rng(spec.seed, static_cast<std::uint64_t>(i));
    SyntheticExample ex = generate_example(spec, rng);
    const std::string id = fmt::format("{}_{:06d}", id_prefix, i);
    const ScoreMap map = scoremap::oracle_render(ex.layout, ex.image.height(), ex.image.width(),
                                                 spec.oracle_sigma_px);
    save_image(out_dir / "images" / (id + ".png"), ex.image);
    write_tensor(out_dir / "scoremaps" / (id + ".rwt"), map);
    {
      std::ofstream lf(out_dir / "layouts" / (id + ".json"));
      if (!lf) throw Error("cannot write layout for " + id);
      lf << scoremap::to_json(ex.layout).dump() << '\n';
    }

    ManifestRecord r;
    r.image_id = id;
    r.image_path = "images/" + id + ".png";
    r.score_map_path = "scoremaps/" + id + ".rwt";
    r.category = categories[std::uniform_int_distribution<std::size_t>(
        0, categories.size() - 1)(rng)];
    r.aggregated = AggregatedLabel{id, ex.label, 5, 5, false, LabelSource::kVote};
    r.binary_class = annotation::binarize_label(ex.label);
    r.n_text_regions = static_cast<int>(ex.layout.glyphs.size());
    r.review_state = ReviewState::kPending;
    manifest.append(std::move(r));

    std::uniform_real_distribution<double> time(4.0, 40.0);
    for (int w = 0; w < 5; ++w) {
      votes.push_back(VoteRecord{fmt::format("w{:02d}", w), id, ex.label,
                                 std::round(time(rng) * 100) / 100, i / 100});
    }
  }
  write_manifest(out_dir / "manifest.jsonl", manifest);
  write_votes(out_dir / "votes.csv", votes);
  return manifest;
}

}  // namespace rwt::synth

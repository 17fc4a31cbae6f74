#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <utility>

#include <json.hpp>

#include "rwt/datamodel/manifest.hpp"
#include "rwt/datamodel/types.hpp"
#include "rwt/scoremap/layout.hpp"

namespace rwt::synth {

struct Range {
  double lo = 0;
  double hi = 0;
};

struct SyntheticSpec {
  int image_side = 64;
  // Probabilities in TextClass order: Overlaying, Organic, Both, None.
  std::array<double, 4> class_mix{0.25, 0.25, 0.25, 0.25};
  struct Overlay {
    Range font_scale{0.12, 0.2};  // glyph height as a fraction of image_side
    Range opacity{0.3, 1.0};
    std::pair<int, int> glyphs{3, 6};
  } overlay;
  struct SceneText {
    bool perspective = true;
    Range tilt{0.12, 0.4};  // absolute in-plane rotation, radians
    double occlusion_probability = 0.3;
    std::pair<int, int> glyphs{3, 6};
  } scene_text;
  struct Background {
    std::pair<int, int> furniture{1, 3};
    double window_probability = 0.4;
    double distractor_probability = 0.5;  // letter-like decor strokes
    // Chance that the detector fires on a decor pattern (a decoy response).
    double decoy_response_probability = 0.0;
    double noise = 0.03;  // sensor noise std
  } background;
  // Non-text graphics added in post-processing (collage borders, colour
  // swatches, badges). They never carry characters, so labels ignore them.
  double graphics_probability = 0.5;
  // Optical blur std in pixels, applied to the captured scene before any
  // overlay is composited.
  double camera_blur_px = 1.0;
  double oracle_sigma_px = 4.0;
  std::uint64_t seed = 0;

  void validate() const;
};

nlohmann::json to_json(const SyntheticSpec& s);
SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j);

struct SyntheticExample {
  ImageTensor image;
  TextClass label = TextClass::kNone;
  scoremap::CharacterLayout layout;
};

SyntheticExample generate_example(const SyntheticSpec& spec, std::mt19937_64& rng);

// Independent stream for example `index`.
std::mt19937_64 example_rng(std::uint64_t seed, std::uint64_t index);

// Writes images/<id>.png, scoremaps/<id>.rwt, layouts/<id>.json, votes.csv
// (five agreeing votes per image) and manifest.jsonl under out_dir. Paths in
// the manifest are relative to out_dir.
DatasetManifest generate_corpus(const SyntheticSpec& spec, int n,
                                const std::filesystem::path& out_dir,
                                const std::string& id_prefix = "syn");

}  // namespace rwt::synth

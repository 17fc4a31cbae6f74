#include <doctest.h>

#include <cmath>
#include <random>

#include "rwt/scoremap/backbone.hpp"
#include "rwt/scoremap/boxes.hpp"
#include "rwt/scoremap/layout.hpp"
#include "rwt/scoremap/oracle.hpp"
#include "rwt/scoremap/provider.hpp"
#include "support.hpp"

using namespace rwt;
using namespace rwt::scoremap;

namespace {

std::pair<int, int> argmax(const std::vector<float>& plane, int w) {
  const auto it = std::max_element(plane.begin(), plane.end());
  const auto k = static_cast<int>(it - plane.begin());
  return {k / w, k % w};
}

}  // namespace

TEST_CASE("oracle rendering") {
  SUBCASE("empty layout gives zero maps") {
    const auto m = oracle_render({}, 64, 64, 4.0);
    CHECK(m == ScoreMap(32, 32));
  }
  SUBCASE("a glyph at pixel (32, 16) peaks at cell (16, 8)") {
    CharacterLayout l;
    l.glyphs.push_back({32.0, 16.0, 1.0, GlyphKind::kOverlay});
    const auto m = oracle_render(l, 64, 64, 4.0);
    const auto [r, c] = argmax(m.region_plane(), m.width());
    CHECK(std::abs(r - 8) <= 1);
    CHECK(std::abs(c - 16) <= 1);
    // Map coordinate (15.75, 7.75); sigma in cells is 2.
    const double expect = std::exp(-(0.25 * 0.25 + 0.25 * 0.25) / 8.0);
    CHECK(m.region(8, 16) == doctest::Approx(expect).epsilon(1e-6));
    CHECK(m.region(7, 15) == doctest::Approx(std::exp(-(0.75 * 0.75 * 2) / 8.0)).epsilon(1e-6));
    CHECK(*std::max_element(m.affinity_plane().begin(), m.affinity_plane().end()) == 0.0f);
  }
  SUBCASE("Gaussian is symmetric around a cell-centred glyph") {
    CharacterLayout l;
    l.glyphs.push_back({32.5, 32.5, 1.0, GlyphKind::kScene});  // map (16, 16)
    const auto m = oracle_render(l, 64, 64, 6.0);
    CHECK(m.region(16, 16) == 1.0f);
    for (int d = 1; d < 8; ++d) {
      CHECK(m.region(16 + d, 16) == m.region(16 - d, 16));
      CHECK(m.region(16, 16 + d) == m.region(16, 16 - d));
      CHECK(m.region(16 + d, 16 + d) == m.region(16 - d, 16 - d));
      CHECK(m.region(16, 16 + d) < m.region(16, 16 + d - 1));
    }
  }
  SUBCASE("affinity peaks at the midpoint of a link") {
    CharacterLayout l;
    l.glyphs.push_back({20.5, 40.5, 1.0, GlyphKind::kOverlay});
    l.glyphs.push_back({40.5, 40.5, 1.0, GlyphKind::kOverlay});
    l.links.push_back({0, 1});
    const auto m = oracle_render(l, 64, 64, 4.0);
    const auto [r, c] = argmax(m.affinity_plane(), m.width());
    CHECK(r == 20);
    CHECK(c == 15);
    CHECK(m.affinity(20, 15) == 1.0f);
  }
  SUBCASE("adding glyphs never lowers a cell") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 63.0);
    CharacterLayout l;
    auto prev = oracle_render(l, 64, 64, 4.0);
    for (int k = 0; k < 10; ++k) {
      l.glyphs.push_back({u(rng), u(rng), 1.0, GlyphKind::kScene});
      const auto next = oracle_render(l, 64, 64, 4.0);
      for (std::size_t i = 0; i < next.region_plane().size(); ++i) {
        CHECK(next.region_plane()[i] >= prev.region_plane()[i]);
      }
      prev = next;
    }
    CHECK(oracle_render(l, 64, 64, 4.0) == prev);
  }
  SUBCASE("decoys render in the region channel only") {
    CharacterLayout l;
    l.decoys.push_back({10.5, 10.5, 1.0, GlyphKind::kScene});
    const auto m = oracle_render(l, 32, 32, 4.0);
    CHECK(m.region(5, 5) == 1.0f);
    CHECK(*std::max_element(m.affinity_plane().begin(), m.affinity_plane().end()) == 0.0f);
  }
  SUBCASE("invalid input") {
    CharacterLayout l;
    l.glyphs.push_back({70.0, 10.0, 1.0, GlyphKind::kScene});
    CHECK_THROWS_AS(oracle_render(l, 64, 64, 4.0), Error);
    CHECK_THROWS_AS(oracle_render({}, 64, 64, 0.0), Error);
    CHECK_THROWS_AS(oracle_render({}, 63, 64, 4.0), Error);
    CharacterLayout bad_link;
    bad_link.glyphs.push_back({1.0, 1.0, 1.0, GlyphKind::kScene});
    bad_link.links.push_back({0, 3});
    CHECK_THROWS_AS(oracle_render(bad_link, 64, 64, 4.0), Error);
  }
}

TEST_CASE("layouts round-trip through JSON") {
  CharacterLayout l;
  l.glyphs.push_back({1.5, 2.5, 1.25, GlyphKind::kOverlay});
  l.glyphs.push_back({3.0, 4.0, 0.5, GlyphKind::kScene});
  l.links.push_back({0, 1});
  CHECK(layout_from_json(to_json(l)) == l);
  CHECK_FALSE(to_json(l).contains("decoys"));
  l.decoys.push_back({7.0, 8.0, 1.0, GlyphKind::kScene});
  CHECK(layout_from_json(to_json(l)) == l);
  CHECK(l.has_kind(GlyphKind::kOverlay));
  CHECK_FALSE(CharacterLayout{}.has_kind(GlyphKind::kScene));
}

TEST_CASE("provider") {
  ImageTensor img(64, 48);
  CharacterLayout l;
  l.glyphs.push_back({10.0, 10.0, 1.0, GlyphKind::kScene});
  ProviderConfig cfg;
  const auto m = compute_score_maps(img, cfg, &l);
  CHECK(m.height() == 32);
  CHECK(m.width() == 24);
  CHECK(m == oracle_render(l, 64, 48, cfg.oracle_sigma_px));
  CHECK_THROWS_AS(compute_score_maps(img, cfg), Error);

  ProviderConfig bad;
  bad.mode = ProviderMode::kPretrainedBackbone;
  CHECK_THROWS_AS(bad.validate(), Error);
  ProviderConfig extra;
  extra.weights_path = "w.ckpt";
  CHECK_THROWS_AS(extra.validate(), Error);
  CHECK(parse_provider_mode("oracle") == ProviderMode::kSyntheticOracle);
  CHECK_THROWS_AS(parse_provider_mode("magic"), Error);
}

TEST_CASE("backbone") {
  test::TempDir dir("backbone");
  const auto net = ScoreMapBackbone::random(3);
  std::mt19937_64 rng(1);
  const auto img = test::random_image(224, 224, rng);
  const auto m = net.infer(img);
  CHECK(m.height() == 112);
  CHECK(m.width() == 112);
  for (float v : m.region_plane()) {
    CHECK(v >= 0.0f);
    CHECK(v <= 1.0f);
  }
  CHECK(net.infer(img) == m);

  net.save(dir / "w.ckpt");
  ProviderConfig cfg;
  cfg.mode = ProviderMode::kPretrainedBackbone;
  cfg.weights_path = dir / "w.ckpt";
  CHECK(compute_score_maps(img, cfg) == m);

  CHECK_THROWS_AS(ScoreMapBackbone::load(dir / "missing.ckpt"), Error);
  const auto size = std::filesystem::file_size(dir / "w.ckpt");
  std::filesystem::resize_file(dir / "w.ckpt", size - 16);
  CHECK_THROWS_AS(ScoreMapBackbone::load(dir / "w.ckpt"), Error);
  CHECK_THROWS_AS(net.infer(ImageTensor(16, 16)), Error);
}

TEST_CASE("boxes") {
  ScoreMap m(10, 10);
  CHECK(extract_boxes(m).empty());
  m.region(2, 3) = 0.9f;
  m.region(3, 4) = 0.95f;
  m.region(3, 5) = 0.85f;
  m.region(8, 8) = 0.8f;  // not strictly above the threshold
  const auto boxes = extract_boxes(m);
  REQUIRE(boxes.size() == 1);
  CHECK(boxes[0] == Box{6, 4, 6, 4});
  m.region(8, 8) = 0.81f;
  CHECK(extract_boxes(m).size() == 2);
  CHECK(to_json(boxes[0])["width"] == 6);
}

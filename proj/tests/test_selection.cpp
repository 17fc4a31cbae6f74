#include <doctest.h>

#include <map>
#include <numeric>
#include <random>

#include "rwt/selection/gate.hpp"
#include "support.hpp"

using namespace rwt;
using namespace rwt::selection;

namespace {

// Direct evaluation of the gate formula, independent of the library.
double gate_oracle(const ScoreMap& m, double t) {
  double s = 0;
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x)
      if (m.region(y, x) > t) s += m.region(y, x);
  return 4.0 / ((2.0 * m.height()) * (2.0 * m.width())) * s;
}

ManifestRecord record(const std::string& id) {
  ManifestRecord r;
  r.image_id = id;
  r.image_path = id + ".png";
  r.category = product_categories().front();
  return r;
}

}  // namespace

TEST_CASE("defaults are T = 0.8, cutoff 5e-4, strict indicator") {
  GateConfig cfg;
  CHECK(cfg.region_threshold == 0.8);
  CHECK(cfg.gate_cutoff == 5e-4);
  CHECK(cfg.strict_indicator);
}

TEST_CASE("gate score fixtures") {
  ScoreMap m(4, 4);
  CHECK(region_gate_score(m) == 0.0);
  m.region(1, 2) = 0.9f;
  m.region(3, 0) = 0.85f;
  m.affinity(0, 0) = 1.0f;
  CHECK(region_gate_score(m) == doctest::Approx(0.109375).epsilon(1e-12));
  CHECK(std::abs(region_gate_score(m) - 4.0 / 64.0 * 1.75) < 1e-9);

  ScoreMap flat(4, 4);
  for (auto& v : flat.region_plane()) v = 0.8f;
  GateConfig strict;
  strict.region_threshold = 0.8f;
  CHECK(region_gate_score(flat, strict) == 0.0);
  GateConfig loose = strict;
  loose.strict_indicator = false;
  CHECK(region_gate_score(flat, loose) == doctest::Approx(0.8).epsilon(1e-6));
}

TEST_CASE("gate score matches direct evaluation on random maps") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const int h = 1 + static_cast<int>(rng() % 20), w = 1 + static_cast<int>(rng() % 20);
    const auto m = test::random_map(h, w, rng);
    CHECK(region_gate_score(m) == doctest::Approx(gate_oracle(m, 0.8)).epsilon(1e-12));
  }
}

TEST_CASE("gate properties") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  for (int trial = 0; trial < 200; ++trial) {
    auto m = test::random_map(8, 8, rng);
    const double g = region_gate_score(m);
    const double mean = std::accumulate(m.region_plane().begin(), m.region_plane().end(), 0.0) /
                        static_cast<double>(m.cells());
    CHECK(g <= mean + 1e-12);

    const int y = static_cast<int>(rng() % 8), x = static_cast<int>(rng() % 8);
    const float before = m.region(y, x);
    if (before > 0.8f && before < 0.99f) {
      m.region(y, x) = std::min(1.0f, before + 0.01f);
      CHECK(region_gate_score(m) > g);
    } else if (before <= 0.8f) {
      m.region(y, x) = 0.8f * u(rng);
      CHECK(region_gate_score(m) == doctest::Approx(g).epsilon(1e-12));
    }
  }
}

TEST_CASE("candidate selection") {
  // A 100x100 map covers a 200x200 image, so G = (sum of counted cells) / 1e4.
  auto map_with_ones = [](int n) {
    ScoreMap m(100, 100);
    for (int i = 0; i < n; ++i) m.region_plane()[i] = 1.0f;
    return m;
  };
  std::map<std::string, ScoreMap> maps = {
      {"zero", map_with_ones(0)}, {"low", map_with_ones(2)}, {"high", map_with_ones(500)}};
  const ScoreMapSource source = [&](const ManifestRecord& r) -> std::optional<ScoreMap> {
    auto it = maps.find(r.image_id);
    if (it == maps.end()) return std::nullopt;
    return it->second;
  };
  DatasetManifest m;
  for (const char* id : {"zero", "low", "high"}) m.append(record(id));
  CHECK(region_gate_score(maps["low"]) == doctest::Approx(2e-4));
  CHECK(region_gate_score(maps["high"]) == doctest::Approx(0.05));

  const auto kept = select_candidates(m, source);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].image_id == "high");
  CHECK(*kept[0].gate_score == doctest::Approx(0.05));
  CHECK(select_candidates(kept, source) == kept);

  CHECK(select_candidates(DatasetManifest{}, source).empty());

  GateConfig low;
  low.gate_cutoff = 1e-4;
  const auto both = select_candidates(m, source, low);
  REQUIRE(both.size() == 2);
  CHECK(both[0].image_id == "low");
  CHECK(both[1].image_id == "high");
  CHECK(both[0].gate_score.has_value());

  DatasetManifest missing;
  missing.append(record("absent"));
  CHECK_THROWS_AS(select_candidates(missing, source), Error);
}

TEST_CASE("gate config validation") {
  GateConfig c;
  c.region_threshold = 1.5;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.gate_cutoff = 0;
  CHECK_THROWS_AS(c.validate(), Error);
}

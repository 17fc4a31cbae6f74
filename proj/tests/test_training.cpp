#include <doctest.h>

#include <random>

#include "rwt/datamodel/image_io.hpp"
#include "rwt/datamodel/tensor_io.hpp"
#include "rwt/training/optimizer.hpp"
#include "rwt/training/preprocess.hpp"
#include "rwt/training/schedule.hpp"
#include "rwt/training/trainer.hpp"
#include "support.hpp"

using namespace rwt;
using namespace rwt::training;

namespace {

// 20 training examples at 32x32: positives carry a bright region block,
// negatives an empty map.
std::pair<LabeledSet, LabeledSet> toy_sets() {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<float> u(0.0f, 0.1f);
  LabeledSet train_set, val_set;
  for (int i = 0; i < 24; ++i) {
    const int label = i % 2;
    ScoreMap m(16, 16);
    for (auto& v : m.region_plane()) v = u(rng);
    if (label) {
      for (int y = 4; y < 12; ++y)
        for (int x = 4; x < 12; ++x) m.region(y, x) = 0.9f;
    }
    (i < 20 ? train_set : val_set)
        .add("t" + std::to_string(i), test::random_image(32, 32, rng), m, label);
  }
  return {train_set, val_set};
}

model::ModelConfig linear_model() {
  model::ModelConfig mc;
  mc.variant = model::ModelVariant::kBinarizedLinear;
  mc.input_side = 32;
  return mc;
}

}  // namespace

TEST_CASE("resize and pad geometry") {
  const auto same = pad_geometry(224, 224, 224);
  CHECK(same.content_h == 224);
  CHECK(same.top == 0);
  std::mt19937_64 rng(2);
  const auto img = test::random_image(224, 224, rng);
  CHECK(resize_and_pad(img, 224) == img);

  const auto wide = pad_geometry(200, 400, 224);
  CHECK(wide.content_h == 112);
  CHECK(wide.content_w == 224);
  CHECK(wide.top == 56);
  CHECK(224 - wide.top - wide.content_h == 56);

  const auto tall = pad_geometry(400, 200, 224);
  CHECK(tall.content_h == 224);
  CHECK(tall.content_w == 112);
  CHECK(tall.left == 56);

  const auto flat = pad_geometry(100, 300, 224);
  CHECK(flat.content_h == 75);
  CHECK(flat.content_w == 224);
  CHECK(flat.top == 74);
  CHECK(224 - flat.top - flat.content_h == 75);
  CHECK(flat.left == 0);

  ImageTensor white(100, 300, 1.0f);
  const auto padded = resize_and_pad(white, 224);
  CHECK(padded.height() == 224);
  CHECK(padded.at(0, 100, 0) == 0.0f);
  CHECK(padded.at(73, 100, 0) == 0.0f);
  CHECK(padded.at(74 + 37, 100, 1) == doctest::Approx(1.0f));
  CHECK(padded.at(74 + 75, 100, 2) == 0.0f);

  ScoreMap m(50, 150);
  const auto mp = resize_and_pad(m, 112);
  CHECK(mp.height() == 112);
  CHECK(mp.width() == 112);
  CHECK_THROWS_AS(pad_geometry(0, 10, 224), Error);
}

TEST_CASE("plateau annealing") {
  TrainConfig cfg;
  SUBCASE("improvement keeps the rate") {
    auto s = TrainState::initial(cfg);
    CHECK(plateau_step(s, 1.0, cfg));
    CHECK(plateau_step(s, 0.8, cfg));
    CHECK(s.best_val_loss == 0.8);
    CHECK(s.current_lr == 0.015);
  }
  SUBCASE("a flat epoch halves the rate") {
    auto s = TrainState::initial(cfg);
    plateau_step(s, 1.0, cfg);
    CHECK_FALSE(plateau_step(s, 1.0, cfg));
    CHECK(s.current_lr == doctest::Approx(0.0075).epsilon(1e-15));
    plateau_step(s, 1.0, cfg);
    CHECK(s.current_lr == doctest::Approx(0.00375).epsilon(1e-15));
    CHECK(s.plateau_events == 2);
  }
  SUBCASE("improvements smaller than epsilon count as a plateau") {
    auto s = TrainState::initial(cfg);
    plateau_step(s, 1.0, cfg);
    plateau_step(s, 1.0 - cfg.plateau_epsilon / 2, cfg);
    CHECK(s.current_lr == doctest::Approx(0.0075));
  }
}

TEST_CASE("SGD with momentum and weight decay") {
  nn::Parameter p("p", nn::Shape{1, 1, 1, 2});
  p.value[0] = 1.0f;
  p.value[1] = -2.0f;
  p.grad[0] = 0.5f;
  p.grad[1] = 0.25f;
  SgdMomentum opt(0.1, 0.9, 0.01);
  opt.step({&p});
  // v = g + wd * theta; theta -= lr * v.
  CHECK(p.value[0] == doctest::Approx(1.0 - 0.1 * (0.5 + 0.01)).epsilon(1e-7));
  CHECK(p.value[1] == doctest::Approx(-2.0 - 0.1 * (0.25 - 0.02)).epsilon(1e-7));
  const double v0 = 0.51, theta0 = 1.0 - 0.1 * 0.51;
  opt.step({&p});
  CHECK(p.value[0] == doctest::Approx(theta0 - 0.1 * (0.9 * v0 + 0.5 + 0.01 * theta0))
                          .epsilon(1e-7));
  nn::Parameter q("q", nn::Shape{1, 1, 1, 1});
  CHECK_THROWS_AS(opt.step({&p, &q}), Error);
}

TEST_CASE("training config") {
  TrainConfig c;
  CHECK(c.lr0 == 0.015);
  CHECK(c.momentum == 0.9);
  CHECK(c.batch_size == 32);
  CHECK(c.weight_decay == 1e-5);
  CHECK(c.anneal_factor == 0.5);
  CHECK(train_config_from_json(to_json(c)).lr0 == c.lr0);
  CHECK_THROWS_AS(train_config_from_json({{"learning_rate", 1}}), Error);
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("linear toy problem trains and is deterministic") {
  const auto [train_set, val_set] = toy_sets();
  TrainConfig cfg;
  cfg.max_epochs = 50;
  cfg.batch_size = 4;
  cfg.target_side = 32;
  std::vector<EpochRecord> seen;
  auto a = train(train_set, val_set, linear_model(), cfg,
                 [&](const EpochRecord& r) { seen.push_back(r); });
  REQUIRE_FALSE(a.state.history.empty());
  CHECK(seen.size() == a.state.history.size());
  CHECK(a.state.history.front().lr == 0.015);
  double best = 1e9;
  for (const auto& r : a.state.history) best = std::min(best, r.train_loss);
  CHECK(best < 0.1);
  for (std::size_t i = 1; i < a.state.history.size(); ++i) {
    const double prev = a.state.history[i - 1].lr, cur = a.state.history[i].lr;
    CHECK((cur == prev || cur == doctest::Approx(prev * 0.5).epsilon(1e-12)));
  }
  const auto scored = score_set(a.model, val_set);
  for (std::size_t i = 0; i < val_set.size(); ++i) {
    CHECK((scored.scores[i] >= 0.5) == (val_set.labels[i] == 1));
  }

  auto b = train(train_set, val_set, linear_model(), cfg);
  REQUIRE(b.state.history.size() == a.state.history.size());
  for (std::size_t i = 0; i < a.state.history.size(); ++i) {
    CHECK(a.state.history[i].train_loss == b.state.history[i].train_loss);
    CHECK(a.state.history[i].val_loss == b.state.history[i].val_loss);
  }

  LabeledSet one_class;
  one_class.add("x", train_set.images[0], train_set.maps[0], 0);
  CHECK_THROWS_AS(train(one_class, val_set, linear_model(), cfg), Error);
  CHECK(bce_with_logit(0.0, 1) == doctest::Approx(std::log(2.0)));
  CHECK(bce_with_logit(-800.0, 0) == 0.0);
}

TEST_CASE("loading a split from disk") {
  test::TempDir dir("split");
  std::mt19937_64 rng(3);
  DatasetManifest m;
  for (int i = 0; i < 3; ++i) {
    ManifestRecord r;
    r.image_id = "r" + std::to_string(i);
    r.image_path = r.image_id + ".png";
    r.score_map_path = r.image_id + ".rwt";
    r.category = product_categories().front();
    r.aggregated = AggregatedLabel{r.image_id, i ? TextClass::kBoth : TextClass::kNone, 5, 5,
                                   false, LabelSource::kVote};
    r.binary_class = i ? BinaryClass::kPositive : BinaryClass::kNegative;
    r.split = i < 2 ? Split::kTrain : Split::kVal;
    save_image(dir / r.image_path, test::random_image(20, 40, rng));
    write_tensor(dir / *r.score_map_path, test::random_map(10, 20, rng));
    m.append(r);
  }
  const auto s = load_split(m, Split::kTrain, dir.path(), 32);
  REQUIRE(s.size() == 2);
  CHECK(s.images[0].height() == 32);
  CHECK(s.maps[0].height() == 16);
  CHECK(s.labels == std::vector<int>{0, 1});
  m[0].score_map_path.reset();
  CHECK_THROWS_AS(load_split(m, Split::kTrain, dir.path(), 32), Error);
}

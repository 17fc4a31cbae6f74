#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "rwt/nn/checkpoint.hpp"
#include "rwt/nn/layers.hpp"
#include "rwt/nn/resnet.hpp"
#include "support.hpp"

using namespace rwt;
using namespace rwt::nn;

namespace {

Tensor random_tensor(Shape s, std::mt19937_64& rng, float lo = -1.0f, float hi = 1.0f) {
  std::uniform_real_distribution<float> u(lo, hi);
  Tensor t(s);
  for (auto& v : t.values()) v = u(rng);
  return t;
}

double dot(const Tensor& a, const Tensor& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += double(a[i]) * b[i];
  return s;
}

// Central differences of L(x) = <f(x), r> against an analytic gradient, over
// a sample of coordinates. Returns the worst relative error.
double grad_check(Tensor& x, const Tensor& analytic, const std::function<Tensor()>& f,
                  const Tensor& r, std::mt19937_64& rng, int samples = 20, float h = 1e-2f) {
  double worst = 0;
  for (int k = 0; k < samples; ++k) {
    const std::size_t i = rng() % x.size();
    const float keep = x[i];
    x[i] = keep + h;
    const double up = dot(f(), r);
    x[i] = keep - h;
    const double down = dot(f(), r);
    x[i] = keep;
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max(1e-2, std::abs(numeric) + std::abs(analytic[i]));
    worst = std::max(worst, std::abs(numeric - analytic[i]) / denom);
  }
  return worst;
}

}  // namespace

TEST_CASE("bilinear upsampling") {
  std::mt19937_64 rng(1);
  SUBCASE("constants are preserved") {
    Tensor x({2, 3, 5, 4}, 0.37f);
    const auto y = upsample2x_bilinear(x);
    CHECK(y.shape() == Shape{2, 3, 10, 8});
    for (float v : y.values()) CHECK(v == doctest::Approx(0.37f).epsilon(1e-6));
  }
  SUBCASE("outputs stay within the input range") {
    const auto x = random_tensor({1, 1, 6, 7}, rng, 0.0f, 1.0f);
    const auto y = upsample2x_bilinear(x);
    const auto [lo, hi] = std::minmax_element(x.values().begin(), x.values().end());
    for (float v : y.values()) {
      CHECK(v >= *lo - 1e-6f);
      CHECK(v <= *hi + 1e-6f);
    }
  }
  SUBCASE("first output row uses weights 0.75 / 0.25 toward the next input") {
    Tensor x({1, 1, 1, 2});
    x[0] = 0.0f;
    x[1] = 1.0f;
    const auto y = upsample2x_bilinear(x);
    CHECK(y.at(0, 0, 0, 0) == 0.0f);
    CHECK(y.at(0, 0, 0, 1) == doctest::Approx(0.25f));
    CHECK(y.at(0, 0, 0, 2) == doctest::Approx(0.75f));
    CHECK(y.at(0, 0, 0, 3) == 1.0f);
  }
  SUBCASE("backward is the adjoint") {
    const auto x = random_tensor({2, 2, 5, 3}, rng);
    const auto g = random_tensor({2, 2, 10, 6}, rng);
    CHECK(dot(upsample2x_bilinear(x), g) ==
          doctest::Approx(dot(x, upsample2x_bilinear_backward(g))).epsilon(1e-5));
  }
  SUBCASE("generic resize to the same size is the identity") {
    const auto x = random_tensor({1, 2, 4, 5}, rng);
    CHECK(resize_bilinear(x, 4, 5) == x);
  }
}

TEST_CASE("convolution gradients") {
  std::mt19937_64 rng(2);
  Conv2d conv("c", 3, 4, 3, 2, 1, true);
  conv.init_kaiming(rng);
  for (auto& v : conv.bias()->value.values()) v = 0.1f;
  auto x = random_tensor({2, 3, 7, 6}, rng);
  const auto y = conv.forward(x);
  CHECK(y.shape() == Shape{2, 4, 4, 3});
  CHECK(conv.output_shape(x.shape()) == y.shape());
  const auto r = random_tensor(y.shape(), rng);
  conv.weight().zero_grad();
  conv.bias()->zero_grad();
  const auto dx = conv.backward(r);
  const Tensor dw = conv.weight().grad;
  const Tensor db = conv.bias()->grad;
  auto fwd = [&] { return conv.forward(x); };
  CHECK(grad_check(x, dx, fwd, r, rng) < 1e-2);
  CHECK(grad_check(conv.weight().value, dw, fwd, r, rng) < 1e-2);
  CHECK(grad_check(conv.bias()->value, db, fwd, r, rng) < 1e-2);
}

TEST_CASE("linear gradients and shape checks") {
  std::mt19937_64 rng(3);
  Linear fc("fc", 12, 3);
  fc.init_uniform(rng);
  auto x = random_tensor({4, 3, 2, 2}, rng);
  const auto y = fc.forward(x);
  CHECK(y.shape() == Shape{4, 3, 1, 1});
  const auto r = random_tensor(y.shape(), rng);
  fc.weight().zero_grad();
  fc.bias().zero_grad();
  const auto dx = fc.backward(r);
  const Tensor dw = fc.weight().grad;
  auto fwd = [&] { return fc.forward(x); };
  CHECK(grad_check(x, dx, fwd, r, rng) < 1e-3);
  CHECK(grad_check(fc.weight().value, dw, fwd, r, rng) < 1e-3);
  CHECK_THROWS_AS(fc.forward(Tensor({1, 1, 1, 5})), Error);
}

TEST_CASE("batch norm") {
  std::mt19937_64 rng(4);
  BatchNorm2d bn("bn", 3);
  auto x = random_tensor({4, 3, 5, 5}, rng, -2.0f, 3.0f);
  const auto y = bn.forward(x, true);
  for (int c = 0; c < 3; ++c) {
    double s = 0, s2 = 0;
    int n = 0;
    for (int b = 0; b < 4; ++b)
      for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j, ++n) {
          s += y.at(b, c, i, j);
          s2 += double(y.at(b, c, i, j)) * y.at(b, c, i, j);
        }
    CHECK(s / n == doctest::Approx(0.0).scale(1.0).epsilon(1e-5));
    CHECK(s2 / n == doctest::Approx(1.0).epsilon(1e-3));
  }
  const auto r = random_tensor(y.shape(), rng);
  const auto dx = bn.backward(r);
  CHECK(grad_check(x, dx, [&] { return bn.forward(x, true); }, r, rng, 20, 5e-3f) < 2e-2);

  // Eval mode uses running statistics, so it is a per-channel affine map.
  BatchNorm2d fresh("bn", 3);
  const auto e = fresh.forward(x, false);
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(e[i] == doctest::Approx(x[i] / std::sqrt(1.0f + BatchNorm2d::kEps)).epsilon(1e-6));
  }
}

TEST_CASE("pooling and activation") {
  std::mt19937_64 rng(5);
  Relu relu;
  auto x = random_tensor({1, 2, 4, 4}, rng);
  const auto y = relu.forward(x);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(y[i] == std::max(0.0f, x[i]));

  MaxPool2d pool;
  const auto p = pool.forward(x);
  CHECK(p.shape() == Shape{1, 2, 2, 2});
  CHECK(p.at(0, 0, 0, 0) == std::max({x.at(0, 0, 0, 0), x.at(0, 0, 0, 1), x.at(0, 0, 1, 0),
                                      x.at(0, 0, 1, 1)}));
  const auto g = random_tensor(p.shape(), rng);
  CHECK(dot(pool.backward(g), x) == doctest::Approx(dot(g, p)).epsilon(1e-5));

  GlobalAvgPool gap;
  const auto a = gap.forward(x);
  double s = 0;
  for (int i = 0; i < 16; ++i) s += x.values()[i];
  CHECK(a[0] == doctest::Approx(s / 16).epsilon(1e-6));
}

TEST_CASE("residual network") {
  std::mt19937_64 rng(6);
  ResNetConfig cfg;
  cfg.base_width = 4;
  ResNetHead net(cfg, 11);
  auto x = random_tensor({2, 3, 32, 32}, rng);
  const auto y = net.forward(x, false);
  CHECK(y.shape() == Shape{2, 1, 1, 1});
  ResNetHead same(cfg, 11);
  CHECK(same.forward(x, false) == y);

  const Tensor r({2, 1, 1, 1}, 1.0f);
  for (auto* p : net.parameters()) p->zero_grad();
  net.forward(x, false);
  const auto dx = net.backward(r);
  CHECK(grad_check(x, dx, [&] { return net.forward(x, false); }, r, rng, 20, 1e-2f) < 2e-2);
}

TEST_CASE("checkpoints") {
  test::TempDir dir("ckpt");
  std::mt19937_64 rng(7);
  Checkpoint c;
  c.metadata["kind"] = "test";
  const auto t = random_tensor({1, 2, 3, 4}, rng);
  c.put("a", t);
  write_checkpoint(dir / "c.ckpt", c);
  const auto back = read_checkpoint(dir / "c.ckpt");
  CHECK(back.metadata["kind"] == "test");
  REQUIRE(back.contains("a"));
  Tensor dst({1, 2, 3, 4});
  load_into(back, "a", dst);
  CHECK(dst == t);
  Tensor wrong({1, 1, 1, 3});
  CHECK_THROWS_AS(load_into(back, "a", wrong), Error);
  CHECK_THROWS_AS(back.get("b"), Error);

  Checkpoint bad;
  Tensor nan_t({1, 1, 1, 1}, std::nanf(""));
  bad.put("n", nan_t);
  write_checkpoint(dir / "n.ckpt", bad);
  CHECK_THROWS_AS(read_checkpoint(dir / "n.ckpt"), Error);

  std::filesystem::resize_file(dir / "c.ckpt", std::filesystem::file_size(dir / "c.ckpt") - 4);
  CHECK_THROWS_AS(read_checkpoint(dir / "c.ckpt"), Error);
}

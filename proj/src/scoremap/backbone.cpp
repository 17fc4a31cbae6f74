#include "rwt/scoremap/backbone.hpp"

#include <cmath>
#include <random>

#include "rwt/nn/checkpoint.hpp"

namespace rwt::scoremap {

ScoreMapBackbone::ScoreMapBackbone(int width)
    : width_(width),
      conv1_("backbone.conv1", 3, width, 3, 1, 1, true),
      conv2_("backbone.conv2", width, width, 3, 2, 1, true),
      conv3_("backbone.conv3", width, 2, 3, 1, 1, true) {}

ScoreMapBackbone ScoreMapBackbone::random(std::uint64_t seed, int width) {
  if (width <= 0) throw Error("backbone width must be positive");
  ScoreMapBackbone b(width);
  std::mt19937_64 rng(seed);
  b.conv1_.init_kaiming(rng);
  b.conv2_.init_kaiming(rng);
  b.conv3_.init_kaiming(rng);
  return b;
}

ScoreMapBackbone ScoreMapBackbone::load(const std::filesystem::path& weights) {
  if (!std::filesystem::exists(weights)) {
    throw Error("backbone weights '" + weights.string() + "' not found");
  }
  const nn::Checkpoint ckpt = nn::read_checkpoint(weights);
  if (ckpt.metadata.value("kind", "") != "scoremap_backbone") {
    throw Error("'" + weights.string() + "' does not hold score-map backbone weights");
  }
  const int width = ckpt.metadata.value("width", 0);
  if (width <= 0) throw Error("backbone weights declare an invalid width");
  ScoreMapBackbone b(width);
  for (auto* conv : {&b.conv1_, &b.conv2_, &b.conv3_}) {
    nn::load_into(ckpt, conv->weight().name, conv->weight().value);
    nn::load_into(ckpt, conv->bias()->name, conv->bias()->value);
  }
  return b;
}

void ScoreMapBackbone::save(const std::filesystem::path& weights) const {
  nn::Checkpoint ckpt;
  ckpt.metadata = {{"kind", "scoremap_backbone"}, {"width", width_}};
  std::lock_guard lock(*mu_);
  for (auto* conv : {&conv1_, &conv2_, &conv3_}) {
    ckpt.put(conv->weight().name, conv->weight().value);
    ckpt.put(conv->bias()->name, conv->bias()->value);
  }
  nn::write_checkpoint(weights, ckpt);
}

ScoreMap ScoreMapBackbone::infer(const ImageTensor& image) const {
  if (image.height() < kMinSide || image.width() < kMinSide) {
    throw Error("image is smaller than the backbone minimum of " +
                std::to_string(kMinSide) + " pixels");
  }
  if (image.height() % 2 != 0 || image.width() % 2 != 0) {
    throw Error("backbone input must have even dimensions");
  }
  const int h = image.height(), w = image.width();
  nn::Tensor x(nn::Shape{1, 3, h, w});
  for (int y = 0; y < h; ++y)
    for (int xx = 0; xx < w; ++xx)
      for (int c = 0; c < 3; ++c) x.at(0, c, y, xx) = image.at(y, xx, c);

  nn::Tensor out;
  {
    std::lock_guard lock(*mu_);
    nn::Relu r1, r2;
    out = conv3_.forward(r2.forward(conv2_.forward(r1.forward(conv1_.forward(x)))));
  }
  ScoreMap map(h / 2, w / 2);
  for (int y = 0; y < h / 2; ++y)
    for (int xx = 0; xx < w / 2; ++xx) {
      map.region(y, xx) = 1.0f / (1.0f + std::exp(-out.at(0, 0, y, xx)));
      map.affinity(y, xx) = 1.0f / (1.0f + std::exp(-out.at(0, 1, y, xx)));
    }
  map.clamp_unit();
  return map;
}

}  // namespace rwt::scoremap

#include "rwt/nn/resnet.hpp"

namespace rwt::nn {

namespace {

Tensor add(const Tensor& a, const Tensor& b) {
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

}  // namespace

BasicBlock::BasicBlock(const std::string& name, int in_channels,
                       int out_channels, int stride, std::mt19937_64& rng)
    : conv1_(name + ".conv1", in_channels, out_channels, 3, stride, 1, false),
      conv2_(name + ".conv2", out_channels, out_channels, 3, 1, 1, false),
      bn1_(name + ".bn1", out_channels),
      bn2_(name + ".bn2", out_channels) {
  conv1_.init_kaiming(rng);
  conv2_.init_kaiming(rng);
  if (stride != 1 || in_channels != out_channels) {
    proj_.emplace(name + ".proj", in_channels, out_channels, 1, stride, 0, false);
    proj_->init_kaiming(rng);
    proj_bn_.emplace(name + ".proj_bn", out_channels);
  }
}

Tensor BasicBlock::forward(const Tensor& x, bool train) {
  Tensor h = relu1_.forward(bn1_.forward(conv1_.forward(x), train));
  h = bn2_.forward(conv2_.forward(h), train);
  const Tensor shortcut =
      proj_ ? proj_bn_->forward(proj_->forward(x), train) : x;
  return relu_out_.forward(add(h, shortcut));
}

Tensor BasicBlock::backward(const Tensor& grad_out) {
  const Tensor g = relu_out_.backward(grad_out);
  Tensor dx = conv1_.backward(
      bn1_.backward(relu1_.backward(conv2_.backward(bn2_.backward(g)))));
  const Tensor dshort = proj_ ? proj_->backward(proj_bn_->backward(g)) : g;
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += dshort[i];
  return dx;
}

void BasicBlock::collect(std::vector<Parameter*>& out) {
  conv1_.collect(out);
  bn1_.collect(out);
  conv2_.collect(out);
  bn2_.collect(out);
  if (proj_) {
    proj_->collect(out);
    proj_bn_->collect(out);
  }
}

void BasicBlock::collect_buffers(std::vector<Buffer>& out) {
  bn1_.collect_buffers(out);
  bn2_.collect_buffers(out);
  if (proj_bn_) proj_bn_->collect_buffers(out);
}

ResNetHead::ResNetHead(const ResNetConfig& config, std::uint64_t seed)
    : config_(config),
      stem_("head.stem", config.in_channels, config.base_width, 7, 2, 3, false),
      stem_bn_("head.stem_bn", config.base_width),
      fc_("head.fc", config.base_width * 8, 1) {
  std::mt19937_64 rng(seed);
  stem_.init_kaiming(rng);
  int in = config.base_width;
  for (int stage = 0; stage < 4; ++stage) {
    const int width = config.base_width << stage;
    for (int b = 0; b < config.blocks[stage]; ++b) {
      const int stride = (stage > 0 && b == 0) ? 2 : 1;
      blocks_.push_back(std::make_unique<BasicBlock>(
          "head.layer" + std::to_string(stage + 1) + "." + std::to_string(b),
          in, width, stride, rng));
      in = width;
    }
  }
  fc_.init_uniform(rng);
}

Tensor ResNetHead::forward(const Tensor& x, bool train) {
  Tensor h = pool_.forward(
      stem_relu_.forward(stem_bn_.forward(stem_.forward(x), train)));
  for (auto& block : blocks_) h = block->forward(h, train);
  return fc_.forward(gap_.forward(h));
}

Tensor ResNetHead::backward(const Tensor& grad_logits, bool need_input_grad) {
  Tensor g = gap_.backward(fc_.backward(grad_logits));
  for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it) g = (*it)->backward(g);
  g = pool_.backward(g);
  return stem_.backward(stem_bn_.backward(stem_relu_.backward(g)), need_input_grad);
}

void BasicBlock::trace(std::vector<std::int32_t>& out) const {
  relu1_.trace(out);
  relu_out_.trace(out);
}

std::vector<std::int32_t> ResNetHead::trace() const {
  std::vector<std::int32_t> out;
  stem_relu_.trace(out);
  pool_.trace(out);
  for (const auto& block : blocks_) block->trace(out);
  return out;
}

std::vector<Parameter*> ResNetHead::parameters() {
  std::vector<Parameter*> out;
  stem_.collect(out);
  stem_bn_.collect(out);
  for (auto& block : blocks_) block->collect(out);
  fc_.collect(out);
  return out;
}

std::vector<Buffer> ResNetHead::buffers() {
  std::vector<Buffer> out;
  stem_bn_.collect_buffers(out);
  for (auto& block : blocks_) block->collect_buffers(out);
  return out;
}

}  // namespace rwt::nn

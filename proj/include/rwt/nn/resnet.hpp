#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "rwt/nn/layers.hpp"

namespace rwt::nn {

// Two 3x3 convolutions with batch norm and an identity or projected shortcut.
class BasicBlock {
 public:
  BasicBlock(const std::string& name, int in_channels, int out_channels,
             int stride, std::mt19937_64& rng);

  Tensor forward(const Tensor& x, bool train);
  Tensor backward(const Tensor& grad_out);
  void collect(std::vector<Parameter*>& out);
  void collect_buffers(std::vector<Buffer>& out);
  void trace(std::vector<std::int32_t>& out) const;

 private:
  Conv2d conv1_, conv2_;
  BatchNorm2d bn1_, bn2_;
  Relu relu1_, relu_out_;
  std::optional<Conv2d> proj_;
  std::optional<BatchNorm2d> proj_bn_;
};

struct ResNetConfig {
  int base_width = 64;  // channels of the stem and first stage
  int in_channels = 3;
  std::array<int, 4> blocks = {2, 2, 2, 2};
};

// 18-layer residual network (7x7 stem, max-pool, four stages of basic blocks,
// global average pool) ending in a single-logit linear head.
class ResNetHead {
 public:
  ResNetHead(const ResNetConfig& config, std::uint64_t seed);

  // x: (N, in_channels, H, W). Returns logits of shape (N, 1, 1, 1).
  Tensor forward(const Tensor& x, bool train);
  // Returns dL/dx for the last forward input.
  Tensor backward(const Tensor& grad_logits, bool need_input_grad = true);

  std::vector<Parameter*> parameters();
  std::vector<Buffer> buffers();
  // Branch taken by every ReLU and max-pool window in the last forward. Two
  // inputs with equal traces lie in the same smooth piece of the network.
  std::vector<std::int32_t> trace() const;
  Conv2d& stem() { return stem_; }
  const ResNetConfig& config() const { return config_; }

 private:
  ResNetConfig config_;
  Conv2d stem_;
  BatchNorm2d stem_bn_;
  Relu stem_relu_;
  MaxPool2d pool_;
  std::vector<std::unique_ptr<BasicBlock>> blocks_;
  GlobalAvgPool gap_;
  Linear fc_;
};

}  // namespace rwt::nn

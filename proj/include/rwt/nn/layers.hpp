#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "rwt/nn/tensor.hpp"

namespace rwt::nn {

// 2-D convolution computed as im2col + GEMM. Caches its input for backward.
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(std::string name, int in_channels, int out_channels, int kernel,
         int stride, int padding, bool with_bias);

  Tensor forward(const Tensor& x);
  // Accumulates parameter gradients; returns dL/dx unless skipped.
  Tensor backward(const Tensor& grad_out, bool need_input_grad = true);

  // He-normal initialisation (fan_out mode), bias zeroed.
  void init_kaiming(std::mt19937_64& rng);

  Parameter& weight() { return weight_; }
  const Parameter& weight() const { return weight_; }
  Parameter* bias() { return has_bias_ ? &bias_ : nullptr; }
  const Parameter* bias() const { return has_bias_ ? &bias_ : nullptr; }
  void collect(std::vector<Parameter*>& out);

  int in_channels() const { return in_c_; }
  int out_channels() const { return out_c_; }
  int kernel() const { return k_; }
  Shape output_shape(const Shape& in) const;

 private:
  int in_c_ = 0, out_c_ = 0, k_ = 1, stride_ = 1, pad_ = 0;
  bool has_bias_ = false;
  Parameter weight_;  // (out, in, k, k)
  Parameter bias_;    // (1, out, 1, 1)
  Tensor input_;
  FloatBuffer col_;
};

class BatchNorm2d {
 public:
  static constexpr float kEps = 1e-5f;
  static constexpr float kMomentum = 0.1f;

  BatchNorm2d() = default;
  BatchNorm2d(std::string name, int channels);

  Tensor forward(const Tensor& x, bool train);
  Tensor backward(const Tensor& grad_out);

  void collect(std::vector<Parameter*>& out);
  void collect_buffers(std::vector<Buffer>& out);

 private:
  std::string name_;
  int channels_ = 0;
  Parameter gamma_, beta_;
  Tensor running_mean_, running_var_;
  bool last_train_ = false;
  Tensor xhat_;
  std::vector<float> inv_std_;
};

class Relu {
 public:
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& grad_out) const;
  // Appends the on/off state of every unit from the last forward.
  void trace(std::vector<std::int32_t>& out) const;

 private:
  std::vector<std::uint8_t> active_;
  Shape shape_;
};

class MaxPool2d {
 public:
  MaxPool2d(int kernel = 3, int stride = 2, int padding = 1)
      : k_(kernel), stride_(stride), pad_(padding) {}

  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& grad_out) const;
  // Appends the winning input index of every window from the last forward.
  void trace(std::vector<std::int32_t>& out) const;

 private:
  int k_, stride_, pad_;
  Shape in_shape_;
  std::vector<std::int32_t> argmax_;
};

class GlobalAvgPool {
 public:
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& grad_out) const;

 private:
  Shape in_shape_;
};

// Fully connected layer over the flattened per-sample features.
class Linear {
 public:
  Linear() = default;
  Linear(std::string name, int in_features, int out_features);

  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& grad_out, bool need_input_grad = true);

  // Uniform(-1/sqrt(in), 1/sqrt(in)) for weight and bias.
  void init_uniform(std::mt19937_64& rng);

  Parameter& weight() { return weight_; }
  Parameter& bias() { return bias_; }
  void collect(std::vector<Parameter*>& out);
  int in_features() const { return in_; }

 private:
  int in_ = 0, out_ = 0;
  Parameter weight_;  // (1, 1, out, in)
  Parameter bias_;    // (1, 1, 1, out)
  Tensor input_;
};

// Half-pixel-centred bilinear x2 upsampling (corners not pinned) and its
// adjoint.
Tensor upsample2x_bilinear(const Tensor& x);
Tensor upsample2x_bilinear_backward(const Tensor& grad_out);

// Generic half-pixel bilinear resize of every plane to (out_h, out_w).
Tensor resize_bilinear(const Tensor& x, int out_h, int out_w);

}  // namespace rwt::nn

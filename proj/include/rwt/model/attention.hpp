#pragma once

#include <vector>

#include "rwt/datamodel/types.hpp"
#include "rwt/nn/layers.hpp"

namespace rwt::model {

struct AttentionConfig {
  int kernel_size = 33;     // odd; zero padding (k-1)/2 keeps the map grid
  double init_sigma = 8.0;  // in score-map cells
  double init_gain = 1.0;   // kernel = gain * 0.5 * normalised Gaussian per channel
  bool auto_gain = true;    // rescale at training start so typical mask peaks ~1
  bool trainable = true;    // false keeps H at its initialisation
};

// Single-channel mask over the source image grid.
struct Mask {
  int height = 0;
  int width = 0;
  std::vector<float> values;
};

// The mixing layer H with ReLU and x2 bilinear upsampling:
//   mask = UpSample(ReLU(H(F)))
class AttentionMixer {
 public:
  explicit AttentionMixer(const AttentionConfig& config);

  // maps: (N, 2, h, w) -> mask (N, 1, 2h, 2w).
  nn::Tensor forward(const nn::Tensor& maps);
  // Accumulates gradients of H from dL/dmask.
  void backward(const nn::Tensor& grad_mask);

  // Re-initialises H to gain * 0.5 * Gaussian on both channels, bias 0.
  void reset_gaussian(double gain);
  // Scales H so the mean per-sample mask peak over `maps` becomes 1 (samples
  // with an all-zero response are ignored). Returns the applied gain factor.
  double calibrate_gain(const nn::Tensor& maps);

  nn::Conv2d& conv() { return conv_; }
  const nn::Conv2d& conv() const { return conv_; }
  const AttentionConfig& config() const { return config_; }
  void collect(std::vector<nn::Parameter*>& out) { conv_.collect(out); }
  void trace(std::vector<std::int32_t>& out) const { relu_.trace(out); }

 private:
  AttentionConfig config_;
  nn::Conv2d conv_;
  nn::Relu relu_;
};

nn::Tensor to_nchw(const ScoreMap& map);
nn::Tensor to_nchw(const ImageTensor& image);

// Mask for one score map; dimensions are exactly twice the map's.
Mask attention_mask(const ScoreMap& map, AttentionMixer& mixer);

}  // namespace rwt::model

#include "rwt/model/attention.hpp"

#include <algorithm>

#include "rwt/model/gaussian.hpp"

namespace rwt::model {

AttentionMixer::AttentionMixer(const AttentionConfig& config)
    : config_(config),
      conv_("attention.H", 2, 1, config.kernel_size, 1, (config.kernel_size - 1) / 2,
            true) {
  if (config.kernel_size <= 0 || config.kernel_size % 2 == 0) {
    throw Error("attention kernel size must be odd");
  }
  reset_gaussian(config.init_gain);
}

void AttentionMixer::reset_gaussian(double gain) {
  const int k = config_.kernel_size;
  const auto g = gaussian_kernel(k, config_.init_sigma);
  auto& w = conv_.weight().value;
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < k * k; ++i)
      w[static_cast<std::size_t>(c) * k * k + i] = static_cast<float>(gain * 0.5 * g[i]);
  conv_.bias()->value.fill(0.0f);
  config_.init_gain = gain;
}

double AttentionMixer::calibrate_gain(const nn::Tensor& maps) {
  const nn::Tensor mask = forward(maps);
  const std::size_t per = mask.shape().sample_size();
  double sum = 0.0;
  int counted = 0;
  for (int n = 0; n < mask.shape().n; ++n) {
    const float* p = mask.sample(n);
    const float peak = *std::max_element(p, p + per);
    if (peak > 0.0f) {
      sum += peak;
      ++counted;
    }
  }
  if (counted == 0) return 1.0;
  const double factor = counted / sum;
  for (float& v : conv_.weight().value.values()) v = static_cast<float>(v * factor);
  for (float& v : conv_.bias()->value.values()) v = static_cast<float>(v * factor);
  config_.init_gain *= factor;
  return factor;
}

nn::Tensor AttentionMixer::forward(const nn::Tensor& maps) {
  return nn::upsample2x_bilinear(relu_.forward(conv_.forward(maps)));
}

void AttentionMixer::backward(const nn::Tensor& grad_mask) {
  conv_.backward(relu_.backward(nn::upsample2x_bilinear_backward(grad_mask)),
                 /*need_input_grad=*/false);
}

nn::Tensor to_nchw(const ScoreMap& map) {
  nn::Tensor t(nn::Shape{1, 2, map.height(), map.width()});
  std::copy(map.region_plane().begin(), map.region_plane().end(), t.data());
  std::copy(map.affinity_plane().begin(), map.affinity_plane().end(),
            t.data() + map.cells());
  return t;
}

nn::Tensor to_nchw(const ImageTensor& image) {
  const int h = image.height(), w = image.width();
  nn::Tensor t(nn::Shape{1, 3, h, w});
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) t.at(0, c, y, x) = image.at(y, x, c);
  return t;
}

Mask attention_mask(const ScoreMap& map, AttentionMixer& mixer) {
  const nn::Tensor m = mixer.forward(to_nchw(map));
  Mask out{m.shape().h, m.shape().w, {m.values().begin(), m.values().end()}};
  if (out.height != 2 * map.height() || out.width != 2 * map.width()) {
    throw Error("mask shape mismatch after upsampling");
  }
  return out;
}

}  // namespace rwt::model

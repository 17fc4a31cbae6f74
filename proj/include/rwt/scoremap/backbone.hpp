#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>

#include "rwt/datamodel/types.hpp"
#include "rwt/nn/layers.hpp"

namespace rwt::scoremap {

// Frozen convolutional detector producing a (h/2, w/2) region/affinity map:
// conv3x3 -> ReLU -> conv3x3/2 -> ReLU -> conv3x3 -> sigmoid.
// Weights are an external artifact stored in the checkpoint container with
// metadata {"kind":"scoremap_backbone","width":W}.
class ScoreMapBackbone {
 public:
  static constexpr int kMinSide = 32;

  // Throws rwt::Error on missing, truncated, or mismatched weights.
  static ScoreMapBackbone load(const std::filesystem::path& weights);
  // Randomly initialised weights, for fixtures and plumbing tests.
  static ScoreMapBackbone random(std::uint64_t seed, int width = 8);

  void save(const std::filesystem::path& weights) const;

  // Deterministic; safe to call concurrently.
  ScoreMap infer(const ImageTensor& image) const;

  int width() const { return width_; }

 private:
  explicit ScoreMapBackbone(int width);

  int width_;
  std::unique_ptr<std::mutex> mu_ = std::make_unique<std::mutex>();
  mutable nn::Conv2d conv1_, conv2_, conv3_;
};

}  // namespace rwt::scoremap

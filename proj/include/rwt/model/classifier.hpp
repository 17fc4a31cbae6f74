#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string_view>

#include "rwt/datamodel/types.hpp"
#include "rwt/model/attention.hpp"
#include "rwt/nn/checkpoint.hpp"
#include "rwt/nn/resnet.hpp"

namespace rwt::model {

enum class ModelVariant { kCraftMasked, kUnmaskedResnet, kBinarizedLinear };

std::string_view to_string(ModelVariant v);
// Accepts both "craft-masked" and "craft_masked" spellings.
ModelVariant parse_variant(std::string_view s);

struct ModelConfig {
  ModelVariant variant = ModelVariant::kCraftMasked;
  AttentionConfig attention;
  int head_width = 64;    // ResNet-18 base width; 64 is the standard network
  int input_side = 224;   // images are input_side^2, maps (input_side/2)^2
  std::uint64_t seed = 0;
};

// A mini-batch in NCHW layout: images (N,3,H,W) in [0,1] and score maps
// (N,2,H/2,W/2).
struct Batch {
  nn::Tensor images;
  nn::Tensor maps;
  int size() const { return images.shape().n; }
};

Batch make_batch(std::span<const ImageTensor* const> images,
                 std::span<const ScoreMap* const> maps);

class OverlayClassifier {
 public:
  explicit OverlayClassifier(const ModelConfig& config);

  // Logits (N,1,1,1). `train` selects batch statistics in batch norm.
  nn::Tensor forward(const Batch& batch, bool train);
  // Backpropagates dL/dlogits of the last forward into parameter gradients.
  void backward(const nn::Tensor& grad_logits);

  // Trainable parameters only.
  std::vector<nn::Parameter*> parameters();
  // Everything persisted in a checkpoint, frozen layers included.
  std::vector<nn::Parameter*> all_parameters();
  std::vector<nn::Buffer> buffers();
  void zero_grad();
  // ReLU and max-pool branches of the last forward (see ResNetHead::trace).
  std::vector<std::int32_t> trace() const;

  // Probability of the positive class, inference mode.
  double predict(const ImageTensor& image, const ScoreMap& map);
  // Runs the ResNet head on image * mask (mask broadcast over channels).
  // Not available for the linear variant.
  double predict_with_mask(const ImageTensor& image, const Mask& mask);

  const ModelConfig& config() const { return config_; }
  AttentionMixer* mixer() { return mixer_.get(); }
  nn::ResNetHead* head() { return head_.get(); }
  nn::Linear* linear() { return linear_.get(); }

  nn::Checkpoint to_checkpoint();
  static OverlayClassifier from_checkpoint(const nn::Checkpoint& ckpt);
  void save(const std::filesystem::path& path);
  static OverlayClassifier load(const std::filesystem::path& path);

  // Copies every parameter and buffer value from `other` (same config).
  void copy_state_from(OverlayClassifier& other);

 private:
  ModelConfig config_;
  std::unique_ptr<AttentionMixer> mixer_;
  std::unique_ptr<nn::ResNetHead> head_;
  std::unique_ptr<nn::Linear> linear_;

  // Cached by forward for backward.
  nn::Tensor images_;
  nn::Tensor mask_;
};

double sigmoid(double logit);

}  // namespace rwt::model

#include "rwt/scoremap/provider.hpp"

#include "rwt/scoremap/oracle.hpp"

namespace rwt::scoremap {

ProviderMode parse_provider_mode(std::string_view s) {
  if (s == "pretrained_backbone" || s == "pretrained") return ProviderMode::kPretrainedBackbone;
  if (s == "synthetic_oracle" || s == "oracle") return ProviderMode::kSyntheticOracle;
  throw Error("unknown score-map provider mode '" + std::string(s) + "'");
}

void ProviderConfig::validate() const {
  if (mode == ProviderMode::kPretrainedBackbone && !weights_path) {
    throw Error("pretrained_backbone mode requires weights_path");
  }
  if (mode == ProviderMode::kSyntheticOracle && weights_path) {
    throw Error("weights_path is only valid in pretrained_backbone mode");
  }
  if (!(oracle_sigma_px > 0.0)) throw Error("oracle_sigma_px must be positive");
}

ScoreMapProvider::ScoreMapProvider(ProviderConfig config)
    : config_(std::move(config)) {
  config_.validate();
  if (config_.mode == ProviderMode::kPretrainedBackbone) {
    backbone_ = std::make_shared<const ScoreMapBackbone>(
        ScoreMapBackbone::load(*config_.weights_path));
  }
}

ScoreMap ScoreMapProvider::compute(const ImageTensor& image,
                                   const CharacterLayout* layout) const {
  if (config_.mode == ProviderMode::kPretrainedBackbone) {
    return backbone_->infer(image);
  }
  if (layout == nullptr) {
    throw Error("the synthetic oracle needs the image's character layout");
  }
  if (image.height() % 2 != 0 || image.width() % 2 != 0) {
    throw Error("score maps require even image dimensions");
  }
  ScoreMap map = oracle_render(*layout, image.height(), image.width(),
                               config_.oracle_sigma_px);
  map.clamp_unit();
  return map;
}

ScoreMap compute_score_maps(const ImageTensor& image, const ProviderConfig& cfg,
                            const CharacterLayout* layout) {
  return ScoreMapProvider(cfg).compute(image, layout);
}

}  // namespace rwt::scoremap

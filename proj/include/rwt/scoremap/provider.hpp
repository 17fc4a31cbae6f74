#pragma once

#include <filesystem>
#include <memory>
#include <optional>

#include "rwt/datamodel/types.hpp"
#include "rwt/scoremap/backbone.hpp"
#include "rwt/scoremap/layout.hpp"

namespace rwt::scoremap {

enum class ProviderMode { kPretrainedBackbone, kSyntheticOracle };

ProviderMode parse_provider_mode(std::string_view s);

struct ProviderConfig {
  ProviderMode mode = ProviderMode::kSyntheticOracle;
  std::optional<std::filesystem::path> weights_path;
  double oracle_sigma_px = 4.0;

  // weights_path is required iff mode is kPretrainedBackbone.
  void validate() const;
};

// Read-only after construction.
class ScoreMapProvider {
 public:
  explicit ScoreMapProvider(ProviderConfig config);

  // The oracle mode needs the image's ground-truth layout; the backbone
  // ignores it. Output is always (h/2, w/2) with scores in [0,1].
  ScoreMap compute(const ImageTensor& image,
                   const CharacterLayout* layout = nullptr) const;

  const ProviderConfig& config() const { return config_; }

 private:
  ProviderConfig config_;
  std::shared_ptr<const ScoreMapBackbone> backbone_;
};

ScoreMap compute_score_maps(const ImageTensor& image, const ProviderConfig& cfg,
                            const CharacterLayout* layout = nullptr);

}  // namespace rwt::scoremap

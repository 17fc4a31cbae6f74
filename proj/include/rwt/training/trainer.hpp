#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "rwt/datamodel/manifest.hpp"
#include "rwt/evaluation/metrics.hpp"
#include "rwt/model/classifier.hpp"
#include "rwt/training/schedule.hpp"

namespace rwt::training {

// Images and their score maps, already at the training resolution.
struct LabeledSet {
  std::vector<std::string> ids;
  std::vector<ImageTensor> images;
  std::vector<ScoreMap> maps;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  void add(std::string id, ImageTensor image, ScoreMap map, int label);
};

// Loads every record of `split` with a binary class; image and score-map paths
// are resolved against `base_dir`. Both are resized and padded to side.
LabeledSet load_split(const DatasetManifest& manifest, Split split,
                      const std::filesystem::path& base_dir, int target_side);

struct TrainResult {
  model::OverlayClassifier model;
  TrainState state;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

TrainResult train(const LabeledSet& train_set, const LabeledSet& val_set,
                  const model::ModelConfig& model_cfg, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

// Mean BCE and probabilities over a set, inference mode.
struct Scored {
  std::vector<double> scores;
  double loss = 0;
};
Scored score_set(model::OverlayClassifier& model, const LabeledSet& set, int batch_size = 32);

// Numerically stable binary cross-entropy on a logit.
double bce_with_logit(double logit, int label);

}  // namespace rwt::training

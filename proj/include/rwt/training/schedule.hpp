#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <vector>

#include <json.hpp>

namespace rwt::training {

struct TrainConfig {
  int batch_size = 32;
  double lr0 = 0.015;
  double momentum = 0.9;
  double weight_decay = 1e-5;
  double anneal_factor = 0.5;
  double plateau_epsilon = 1e-4;
  int plateau_patience_epochs = 1;
  double min_lr = 1e-5;
  int max_epochs = 30;
  std::uint64_t seed = 0;
  int target_side = 224;
  // Keep the parameters of the epoch with the lowest validation loss.
  bool restore_best = true;

  void validate() const;
};

nlohmann::json to_json(const TrainConfig& c);
// Missing keys keep their defaults; unknown keys are rejected.
TrainConfig train_config_from_json(const nlohmann::json& j);

struct EpochRecord {
  int epoch = 0;
  double lr = 0;
  double train_loss = 0;
  double val_loss = 0;
  double val_auc = 0;
  double val_f1 = 0;
  double seconds = 0;
};

struct TrainState {
  int epoch = 0;
  double current_lr = 0;
  double best_val_loss = std::numeric_limits<double>::infinity();
  int best_epoch = -1;
  int epochs_since_improvement = 0;
  int plateau_events = 0;
  std::vector<EpochRecord> history;

  static TrainState initial(const TrainConfig& cfg);
};

// Records a validation loss. Returns true when it improved on the best by more
// than plateau_epsilon; otherwise counts towards a plateau and anneals the
// learning rate once the patience is exhausted.
bool plateau_step(TrainState& state, double new_val_loss, const TrainConfig& cfg);

void write_history(const std::filesystem::path& path, const TrainState& state);

}  // namespace rwt::training

#include "rwt/training/schedule.hpp"

#include <fstream>

#include <fmt/format.h>

#include "rwt/datamodel/types.hpp"

namespace rwt::training {

void TrainConfig::validate() const {
  if (batch_size <= 0) throw Error("batch_size must be positive");
  if (!(lr0 > 0)) throw Error("lr0 must be positive");
  if (!(momentum >= 0 && momentum < 1)) throw Error("momentum must be in [0,1)");
  if (!(weight_decay >= 0)) throw Error("weight_decay must be non-negative");
  if (!(anneal_factor > 0 && anneal_factor < 1)) throw Error("anneal_factor must be in (0,1)");
  if (!(plateau_epsilon >= 0)) throw Error("plateau_epsilon must be non-negative");
  if (plateau_patience_epochs <= 0) throw Error("plateau_patience_epochs must be positive");
  if (max_epochs <= 0) throw Error("max_epochs must be positive");
  if (target_side < 32 || target_side % 2 != 0) {
    throw Error("target_side must be even and at least 32");
  }
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"batch_size", c.batch_size},
          {"lr0", c.lr0},
          {"momentum", c.momentum},
          {"weight_decay", c.weight_decay},
          {"anneal_factor", c.anneal_factor},
          {"plateau_epsilon", c.plateau_epsilon},
          {"plateau_patience_epochs", c.plateau_patience_epochs},
          {"min_lr", c.min_lr},
          {"max_epochs", c.max_epochs},
          {"seed", c.seed},
          {"target_side", c.target_side},
          {"restore_best", c.restore_best}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error("training config must be a JSON object");
  TrainConfig c;
  const nlohmann::json defaults = to_json(c);
  for (const auto& [key, _] : j.items()) {
    if (!defaults.contains(key)) throw Error("unknown training config key '" + key + "'");
  }
  try {
    c.batch_size = j.value("batch_size", c.batch_size);
    c.lr0 = j.value("lr0", c.lr0);
    c.momentum = j.value("momentum", c.momentum);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.anneal_factor = j.value("anneal_factor", c.anneal_factor);
    c.plateau_epsilon = j.value("plateau_epsilon", c.plateau_epsilon);
    c.plateau_patience_epochs = j.value("plateau_patience_epochs", c.plateau_patience_epochs);
    c.min_lr = j.value("min_lr", c.min_lr);
    c.max_epochs = j.value("max_epochs", c.max_epochs);
    c.seed = j.value("seed", c.seed);
    c.target_side = j.value("target_side", c.target_side);
    c.restore_best = j.value("restore_best", c.restore_best);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("bad training config: ") + e.what());
  }
  c.validate();
  return c;
}

TrainState TrainState::initial(const TrainConfig& cfg) {
  TrainState s;
  s.current_lr = cfg.lr0;
  return s;
}

bool plateau_step(TrainState& state, double new_val_loss, const TrainConfig& cfg) {
  if (new_val_loss < state.best_val_loss - cfg.plateau_epsilon) {
    state.best_val_loss = new_val_loss;
    state.epochs_since_improvement = 0;
    return true;
  }
  if (++state.epochs_since_improvement >= cfg.plateau_patience_epochs) {
    state.current_lr *= cfg.anneal_factor;
    ++state.plateau_events;
    state.epochs_since_improvement = 0;
  }
  return false;
}

void write_history(const std::filesystem::path& path, const TrainState& state) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "epoch,lr,train_loss,val_loss,val_auc,val_f1,seconds\n";
  for (const auto& r : state.history) {
    out << fmt::format("{},{},{:.6f},{:.6f},{:.6f},{:.6f},{:.3f}\n", r.epoch, r.lr,
                       r.train_loss, r.val_loss, r.val_auc, r.val_f1, r.seconds);
  }
}

}  // namespace rwt::training

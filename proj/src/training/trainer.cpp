#include "rwt/training/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "rwt/datamodel/image_io.hpp"
#include "rwt/datamodel/tensor_io.hpp"
#include "rwt/training/optimizer.hpp"
#include "rwt/training/preprocess.hpp"

namespace rwt::training {

void LabeledSet::add(std::string id, ImageTensor image, ScoreMap map, int label) {
  if (label != 0 && label != 1) throw Error("label must be 0 or 1");
  ids.push_back(std::move(id));
  images.push_back(std::move(image));
  maps.push_back(std::move(map));
  labels.push_back(label);
}

LabeledSet load_split(const DatasetManifest& manifest, Split split,
                      const std::filesystem::path& base_dir, int target_side) {
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };
  LabeledSet set;
  for (const auto& r : manifest) {
    if (r.split != split || !r.binary_class) continue;
    if (!r.score_map_path) throw Error("record " + r.image_id + " has no score map");
    ImageTensor image = resize_and_pad(load_image(resolve(r.image_path)), target_side);
    ScoreMap map = resize_and_pad(read_score_map(resolve(*r.score_map_path)), target_side / 2);
    set.add(r.image_id, std::move(image), std::move(map),
            *r.binary_class == BinaryClass::kPositive ? 1 : 0);
  }
  return set;
}

double bce_with_logit(double z, int y) {
  // max(z,0) - z*y + log(1 + exp(-|z|))
  return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
}

namespace {

model::Batch gather(const LabeledSet& set, std::span<const std::size_t> idx) {
  std::vector<const ImageTensor*> images;
  std::vector<const ScoreMap*> maps;
  for (std::size_t i : idx) {
    images.push_back(&set.images[i]);
    maps.push_back(&set.maps[i]);
  }
  return model::make_batch(images, maps);
}

void check_set(const LabeledSet& set, const char* what, bool need_both) {
  if (set.size() == 0) throw Error(fmt::format("{} set is empty", what));
  const int pos = std::accumulate(set.labels.begin(), set.labels.end(), 0);
  if (need_both && (pos == 0 || pos == static_cast<int>(set.size()))) {
    throw Error(fmt::format("{} set has a single class ({} of {} positive)", what, pos,
                            set.size()));
  }
}

struct Snapshot {
  std::vector<nn::Tensor> params;
  std::vector<nn::Tensor> buffers;

  void take(model::OverlayClassifier& m) {
    params.clear();
    buffers.clear();
    for (auto* p : m.all_parameters()) params.push_back(p->value);
    for (auto& b : m.buffers()) buffers.push_back(*b.tensor);
  }
  void restore(model::OverlayClassifier& m) const {
    auto ps = m.all_parameters();
    for (std::size_t i = 0; i < ps.size(); ++i) ps[i]->value = params[i];
    auto bs = m.buffers();
    for (std::size_t i = 0; i < bs.size(); ++i) *bs[i].tensor = buffers[i];
  }
};

}  // namespace

Scored score_set(model::OverlayClassifier& model, const LabeledSet& set, int batch_size) {
  Scored out;
  out.scores.reserve(set.size());
  std::vector<std::size_t> idx(set.size());
  std::iota(idx.begin(), idx.end(), 0);
  double loss = 0;
  for (std::size_t start = 0; start < idx.size(); start += batch_size) {
    const std::size_t end = std::min(idx.size(), start + batch_size);
    const model::Batch b = gather(set, std::span(idx).subspan(start, end - start));
    const nn::Tensor logits = model.forward(b, false);
    for (std::size_t k = 0; k < end - start; ++k) {
      loss += bce_with_logit(logits[k], set.labels[start + k]);
      out.scores.push_back(model::sigmoid(logits[k]));
    }
  }
  out.loss = loss / static_cast<double>(set.size());
  return out;
}

TrainResult train(const LabeledSet& train_set, const LabeledSet& val_set,
                  const model::ModelConfig& model_cfg, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
  cfg.validate();
  check_set(train_set, "training", true);
  check_set(val_set, "validation", false);

  model::ModelConfig mc = model_cfg;
  mc.seed = cfg.seed;
  TrainResult result{model::OverlayClassifier(mc), TrainState::initial(cfg)};
  model::OverlayClassifier& model = result.model;
  TrainState& state = result.state;

  if (auto* mixer = model.mixer(); mixer && mc.attention.auto_gain) {
    std::vector<std::size_t> all(train_set.size());
    std::iota(all.begin(), all.end(), 0);
    mixer->calibrate_gain(gather(train_set, all).maps);
  }

  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  SgdMomentum opt(cfg.lr0, cfg.momentum, cfg.weight_decay);
  const auto params = model.parameters();
  Snapshot best;
  best.take(model);

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    state.epoch = epoch;
    opt.set_lr(state.current_lr);
    std::shuffle(order.begin(), order.end(), rng);

    double train_loss = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const auto idx = std::span(order).subspan(start, end - start);
      const model::Batch b = gather(train_set, idx);
      const nn::Tensor logits = model.forward(b, true);
      nn::Tensor grad(logits.shape());
      const double inv_n = 1.0 / static_cast<double>(idx.size());
      for (std::size_t k = 0; k < idx.size(); ++k) {
        const int y = train_set.labels[idx[k]];
        const double l = bce_with_logit(logits[k], y);
        if (!std::isfinite(l)) {
          throw Error(fmt::format("training diverged at epoch {}: non-finite loss (lr {})",
                                  epoch, state.current_lr));
        }
        train_loss += l;
        grad[k] = static_cast<float>((model::sigmoid(logits[k]) - y) * inv_n);
      }
      model.zero_grad();
      model.backward(grad);
      opt.step(params);
    }
    train_loss /= static_cast<double>(order.size());

    const Scored val = score_set(model, val_set, cfg.batch_size);
    if (!std::isfinite(val.loss)) {
      throw Error(fmt::format("training diverged at epoch {}: non-finite validation loss",
                              epoch));
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = state.current_lr;
    rec.train_loss = train_loss;
    rec.val_loss = val.loss;
    const int pos = std::accumulate(val_set.labels.begin(), val_set.labels.end(), 0);
    if (pos > 0 && pos < static_cast<int>(val_set.size())) {
      const auto report = evaluation::compute_report(val.scores, val_set.labels);
      rec.val_auc = report.auc;
      rec.val_f1 = report.f1;
    }
    rec.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    state.history.push_back(rec);

    if (plateau_step(state, val.loss, cfg)) {
      state.best_epoch = epoch;
      best.take(model);
    }
    if (on_epoch) on_epoch(rec);
    if (state.current_lr < cfg.min_lr) break;
  }
  if (cfg.restore_best && state.best_epoch >= 0) best.restore(model);
  return result;
}

}  // namespace rwt::training

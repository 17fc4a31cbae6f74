#include "rwt/model/classifier.hpp"

#include <cmath>

#include "rwt/model/features.hpp"

namespace rwt::model {

namespace {

nlohmann::json config_to_json(const ModelConfig& c) {
  return {{"variant", std::string(to_string(c.variant))},
          {"head_width", c.head_width},
          {"input_side", c.input_side},
          {"seed", c.seed},
          {"attention",
           {{"kernel_size", c.attention.kernel_size},
            {"init_sigma", c.attention.init_sigma},
            {"init_gain", c.attention.init_gain},
            {"auto_gain", c.attention.auto_gain},
            {"trainable", c.attention.trainable},
            {"kernel_normalization", "sum_to_one"}}}};
}

ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.variant = parse_variant(j.at("variant").get<std::string>());
  c.head_width = j.at("head_width").get<int>();
  c.input_side = j.at("input_side").get<int>();
  c.seed = j.value("seed", std::uint64_t{0});
  const auto& a = j.at("attention");
  c.attention.kernel_size = a.at("kernel_size").get<int>();
  c.attention.init_sigma = a.at("init_sigma").get<double>();
  c.attention.init_gain = a.at("init_gain").get<double>();
  c.attention.auto_gain = a.value("auto_gain", true);
  c.attention.trainable = a.value("trainable", true);
  return c;
}

}  // namespace

std::string_view to_string(ModelVariant v) {
  switch (v) {
    case ModelVariant::kCraftMasked: return "craft_masked";
    case ModelVariant::kUnmaskedResnet: return "unmasked_resnet";
    case ModelVariant::kBinarizedLinear: return "binarized_linear";
  }
  return "craft_masked";
}

ModelVariant parse_variant(std::string_view s) {
  std::string t(s);
  for (char& ch : t)
    if (ch == '-') ch = '_';
  if (t == "craft_masked") return ModelVariant::kCraftMasked;
  if (t == "unmasked_resnet" || t == "unmasked" || t == "resnet") {
    return ModelVariant::kUnmaskedResnet;
  }
  if (t == "binarized_linear" || t == "binarized_craft") {
    return ModelVariant::kBinarizedLinear;
  }
  throw Error("unknown model variant '" + std::string(s) + "'");
}

double sigmoid(double logit) {
  if (logit >= 0) return 1.0 / (1.0 + std::exp(-logit));
  const double e = std::exp(logit);
  return e / (1.0 + e);
}

Batch make_batch(std::span<const ImageTensor* const> images,
                 std::span<const ScoreMap* const> maps) {
  if (images.empty() || images.size() != maps.size()) {
    throw Error("batch needs matching non-empty image and map lists");
  }
  const int n = static_cast<int>(images.size());
  const int h = images[0]->height(), w = images[0]->width();
  const int mh = maps[0]->height(), mw = maps[0]->width();
  Batch b{nn::Tensor(nn::Shape{n, 3, h, w}), nn::Tensor(nn::Shape{n, 2, mh, mw})};
  for (int i = 0; i < n; ++i) {
    const ImageTensor& img = *images[i];
    const ScoreMap& map = *maps[i];
    if (img.height() != h || img.width() != w || map.height() != mh || map.width() != mw) {
      throw Error("batch members must share dimensions");
    }
    float* dst = b.images.sample(i);
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        for (int c = 0; c < 3; ++c)
          dst[c * plane + static_cast<std::size_t>(y) * w + x] = img.at(y, x, c);
    float* mdst = b.maps.sample(i);
    std::copy(map.region_plane().begin(), map.region_plane().end(), mdst);
    std::copy(map.affinity_plane().begin(), map.affinity_plane().end(), mdst + map.cells());
  }
  return b;
}

OverlayClassifier::OverlayClassifier(const ModelConfig& config) : config_(config) {
  if (config.input_side <= 0 || config.input_side % 2 != 0) {
    throw Error("input_side must be positive and even");
  }
  switch (config.variant) {
    case ModelVariant::kCraftMasked:
      mixer_ = std::make_unique<AttentionMixer>(config.attention);
      [[fallthrough]];
    case ModelVariant::kUnmaskedResnet:
      head_ = std::make_unique<nn::ResNetHead>(
          nn::ResNetConfig{config.head_width, 3, {2, 2, 2, 2}}, config.seed);
      break;
    case ModelVariant::kBinarizedLinear: {
      const int side = config.input_side / 2;
      linear_ = std::make_unique<nn::Linear>("linear", 2 * side * side, 1);
      std::mt19937_64 rng(config.seed);
      linear_->init_uniform(rng);
      break;
    }
  }
}

nn::Tensor OverlayClassifier::forward(const Batch& batch, bool train) {
  const nn::Shape& is = batch.images.shape();
  const nn::Shape& ms = batch.maps.shape();
  if (is.n != ms.n || ms.c != 2 || is.c != 3 || 2 * ms.h != is.h || 2 * ms.w != is.w) {
    throw Error("image/score-map dimension mismatch: images " + nn::to_string(is) +
                ", maps " + nn::to_string(ms));
  }
  switch (config_.variant) {
    case ModelVariant::kBinarizedLinear: {
      const int side = config_.input_side / 2;
      return linear_->forward(nn::resize_bilinear(batch.maps, side, side));
    }
    case ModelVariant::kUnmaskedResnet:
      return head_->forward(batch.images, train);
    case ModelVariant::kCraftMasked: {
      mask_ = mixer_->forward(batch.maps);
      images_ = batch.images;
      nn::Tensor y(is);
      const std::size_t plane = is.plane_size();
      for (int n = 0; n < is.n; ++n) {
        const float* m = mask_.sample(n);
        const float* x = batch.images.sample(n);
        float* out = y.sample(n);
        for (int c = 0; c < 3; ++c)
          for (std::size_t i = 0; i < plane; ++i) out[c * plane + i] = x[c * plane + i] * m[i];
      }
      return head_->forward(y, train);
    }
  }
  throw Error("unreachable");
}

void OverlayClassifier::backward(const nn::Tensor& grad_logits) {
  switch (config_.variant) {
    case ModelVariant::kBinarizedLinear:
      linear_->backward(grad_logits, /*need_input_grad=*/false);
      return;
    case ModelVariant::kUnmaskedResnet:
      head_->backward(grad_logits, /*need_input_grad=*/false);
      return;
    case ModelVariant::kCraftMasked: {
      if (!config_.attention.trainable) {
        head_->backward(grad_logits, /*need_input_grad=*/false);
        return;
      }
      const nn::Tensor dy = head_->backward(grad_logits);
      const nn::Shape& s = images_.shape();
      nn::Tensor dmask(mask_.shape());
      const std::size_t plane = s.plane_size();
      for (int n = 0; n < s.n; ++n) {
        const float* x = images_.sample(n);
        const float* g = dy.sample(n);
        float* d = dmask.sample(n);
        for (std::size_t i = 0; i < plane; ++i)
          d[i] = x[i] * g[i] + x[plane + i] * g[plane + i] + x[2 * plane + i] * g[2 * plane + i];
      }
      mixer_->backward(dmask);
      return;
    }
  }
}

std::vector<nn::Parameter*> OverlayClassifier::parameters() {
  std::vector<nn::Parameter*> out;
  if (mixer_ && config_.attention.trainable) mixer_->collect(out);
  if (head_) {
    auto hp = head_->parameters();
    out.insert(out.end(), hp.begin(), hp.end());
  }
  if (linear_) linear_->collect(out);
  return out;
}

std::vector<nn::Parameter*> OverlayClassifier::all_parameters() {
  std::vector<nn::Parameter*> out;
  if (mixer_) mixer_->collect(out);
  if (head_) {
    auto hp = head_->parameters();
    out.insert(out.end(), hp.begin(), hp.end());
  }
  if (linear_) linear_->collect(out);
  return out;
}

std::vector<nn::Buffer> OverlayClassifier::buffers() {
  return head_ ? head_->buffers() : std::vector<nn::Buffer>{};
}

void OverlayClassifier::zero_grad() {
  for (auto* p : all_parameters()) p->zero_grad();
}

double OverlayClassifier::predict(const ImageTensor& image, const ScoreMap& map) {
  const ImageTensor* ip = &image;
  const ScoreMap* mp = &map;
  const nn::Tensor logits = forward(make_batch({&ip, 1}, {&mp, 1}), false);
  return sigmoid(logits[0]);
}

double OverlayClassifier::predict_with_mask(const ImageTensor& image, const Mask& mask) {
  if (!head_) throw Error("the linear variant has no image head");
  if (mask.height != image.height() || mask.width != image.width()) {
    throw Error("mask dimensions do not match the image");
  }
  nn::Tensor y = to_nchw(image);
  const std::size_t plane = static_cast<std::size_t>(image.height()) * image.width();
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < plane; ++i) y[c * plane + i] *= mask.values[i];
  return sigmoid(head_->forward(y, false)[0]);
}

std::vector<std::int32_t> OverlayClassifier::trace() const {
  std::vector<std::int32_t> out;
  if (mixer_) mixer_->trace(out);
  if (head_) {
    const auto h = head_->trace();
    out.insert(out.end(), h.begin(), h.end());
  }
  return out;
}

nn::Checkpoint OverlayClassifier::to_checkpoint() {
  nn::Checkpoint ckpt;
  ckpt.metadata = {{"kind", "overlay_classifier"}, {"config", config_to_json(config_)}};
  if (mixer_) ckpt.metadata["config"]["attention"]["init_gain"] = mixer_->config().init_gain;
  for (auto* p : all_parameters()) ckpt.put(p->name, p->value);
  for (const auto& b : buffers()) ckpt.put(b.name, *b.tensor);
  return ckpt;
}

OverlayClassifier OverlayClassifier::from_checkpoint(const nn::Checkpoint& ckpt) {
  if (ckpt.metadata.value("kind", "") != "overlay_classifier") {
    throw Error("checkpoint does not hold an overlay classifier");
  }
  OverlayClassifier model(config_from_json(ckpt.metadata.at("config")));
  for (auto* p : model.all_parameters()) nn::load_into(ckpt, p->name, p->value);
  for (const auto& b : model.buffers()) nn::load_into(ckpt, b.name, *b.tensor);
  return model;
}

void OverlayClassifier::save(const std::filesystem::path& path) {
  nn::write_checkpoint(path, to_checkpoint());
}

OverlayClassifier OverlayClassifier::load(const std::filesystem::path& path) {
  return from_checkpoint(nn::read_checkpoint(path));
}

void OverlayClassifier::copy_state_from(OverlayClassifier& other) {
  auto dst = all_parameters();
  auto src = other.all_parameters();
  auto dbuf = buffers();
  auto sbuf = other.buffers();
  if (dst.size() != src.size() || dbuf.size() != sbuf.size()) {
    throw Error("cannot copy state between differently shaped models");
  }
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (dst[i]->value.size() != src[i]->value.size()) throw Error("parameter size mismatch");
    dst[i]->value = src[i]->value;
  }
  for (std::size_t i = 0; i < dbuf.size(); ++i) *dbuf[i].tensor = *sbuf[i].tensor;
}

}  // namespace rwt::model

#include "rwt/training/optimizer.hpp"

#include "rwt/datamodel/types.hpp"

namespace rwt::training {

void SgdMomentum::step(const std::vector<nn::Parameter*>& params) {
  if (velocity_.empty()) {
    velocity_.reserve(params.size());
    for (const auto* p : params) velocity_.emplace_back(p->value.size(), 0.0f);
  }
  if (velocity_.size() != params.size()) throw Error("optimizer parameter set changed");
  const float lr = static_cast<float>(lr_);
  const float mu = static_cast<float>(momentum_);
  const float wd = static_cast<float>(weight_decay_);
  for (std::size_t k = 0; k < params.size(); ++k) {
    float* theta = params[k]->value.data();
    const float* g = params[k]->grad.data();
    float* v = velocity_[k].data();
    const std::size_t n = params[k]->value.size();
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = mu * v[i] + (g[i] + wd * theta[i]);
      theta[i] -= lr * v[i];
    }
  }
}

}  // namespace rwt::training

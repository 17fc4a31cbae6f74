#pragma once

#include <vector>

#include "rwt/nn/tensor.hpp"

namespace rwt::training {

// Heavy-ball SGD with L2 weight decay folded into the gradient:
//   v <- momentum * v + (g + weight_decay * theta)
//   theta <- theta - lr * v
class SgdMomentum {
 public:
  SgdMomentum(double lr, double momentum, double weight_decay)
      : lr_(lr), momentum_(momentum), weight_decay_(weight_decay) {}

  void step(const std::vector<nn::Parameter*>& params);

  double lr() const { return lr_; }
  void set_lr(double lr) { lr_ = lr; }

 private:
  double lr_;
  double momentum_;
  double weight_decay_;
  std::vector<std::vector<float>> velocity_;
};

}  // namespace rwt::training

#pragma once

#include "egomo/common.hpp"

#include <cmath>

namespace egomo::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <class S>
class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  void step(VecX<S>& params, const VecX<S>& grad) {
    if (m_.size() != params.size()) {
      m_.setZero(params.size());
      v_.setZero(params.size());
      steps_ = 0;
    }
    ++steps_;
    const S b1 = static_cast<S>(cfg_.beta1), b2 = static_cast<S>(cfg_.beta2);
    m_ = b1 * m_ + (S(1) - b1) * grad;
    v_ = b2 * v_.array().matrix() + (S(1) - b2) * grad.cwiseProduct(grad);
    const S c1 = S(1) - static_cast<S>(std::pow(cfg_.beta1, steps_));
    const S c2 = S(1) - static_cast<S>(std::pow(cfg_.beta2, steps_));
    const S lr = static_cast<S>(cfg_.lr);
    const S eps = static_cast<S>(cfg_.eps);
    params.array() -=
        lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps);
  }

  long steps() const { return steps_; }

 private:
  AdamConfig cfg_;
  VecX<S> m_, v_;
  long steps_ = 0;
};

}  // namespace egomo::nn

#pragma once

#include <cmath>
#include <span>

#include "sailor/numerics/tape.hpp"

namespace sailor::num {

struct AdamOptions {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  // L2 penalty folded into the gradient before the moment update.
  double weight_decay = 0.0;
};

inline void adam_step(std::span<Parameter* const> params, const AdamOptions& opt) {
  for (Parameter* p : params) {
    ++p->step;
    const double c1 = 1.0 - std::pow(opt.beta1, static_cast<double>(p->step));
    const double c2 = 1.0 - std::pow(opt.beta2, static_cast<double>(p->step));
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double g = p->grad[i] + opt.weight_decay * p->value[i];
      p->m[i] = opt.beta1 * p->m[i] + (1.0 - opt.beta1) * g;
      p->v[i] = opt.beta2 * p->v[i] + (1.0 - opt.beta2) * g * g;
      const double m_hat = p->m[i] / c1;
      const double v_hat = p->v[i] / c2;
      p->value[i] -= opt.lr * m_hat / (std::sqrt(v_hat) + opt.eps);
    }
  }
}

inline void sgd_step(std::span<Parameter* const> params, double lr, double weight_decay = 0.0) {
  for (Parameter* p : params) {
    ++p->step;
    for (std::size_t i = 0; i < p->value.size(); ++i)
      p->value[i] -= lr * (p->grad[i] + weight_decay * p->value[i]);
  }
}

inline void zero_grads(std::span<Parameter* const> params) {
  for (Parameter* p : params) p->zero_grad();
}

}  // namespace sailor::num

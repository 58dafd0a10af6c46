#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "sailor/numerics/tape.hpp"

namespace sailor::num {

struct GradcheckResult {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t checked = 0;
};

/// Compares tape gradients of a scalar closure against central finite
/// differences for every entry of `params`. The closure must be deterministic
/// (fix any noise outside it). Relative error uses max(|analytic|, |numeric|, 1e-6)
/// as denominator so near-zero gradients are judged on an absolute scale.
inline GradcheckResult gradcheck(const std::function<Var(Tape&)>& loss,
                                 std::span<Parameter* const> params, double h = 1e-5) {
  for (Parameter* p : params) p->zero_grad();
  {
    Tape tape;
    tape.backward(loss(tape));
  }
  std::vector<DenseMatrix> analytic;
  for (Parameter* p : params) analytic.push_back(p->grad);

  auto eval = [&loss]() {
    Tape tape;
    return loss(tape).value().item();
  };

  GradcheckResult result;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = *params[k];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double orig = p.value[i];
      p.value[i] = orig + h;
      const double up = eval();
      p.value[i] = orig - h;
      const double down = eval();
      p.value[i] = orig;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic[k][i];
      const double abs_err = std::abs(a - numeric);
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-6});
      result.max_abs_error = std::max(result.max_abs_error, abs_err);
      result.max_rel_error = std::max(result.max_rel_error, abs_err / denom);
      ++result.checked;
    }
  }
  for (Parameter* p : params) p->zero_grad();
  return result;
}

}  // namespace sailor::num

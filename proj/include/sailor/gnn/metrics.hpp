#pragma once

#include <span>
#include <vector>

#include "sailor/error.hpp"
#include "sailor/numerics/dense.hpp"

namespace sailor::gnn {

inline double accuracy(const num::DenseMatrix& logits, std::span<const int> labels,
                       std::span<const std::size_t> mask) {
  if (mask.empty()) throw ValidationError("accuracy: empty mask");
  const auto pred = num::argmax_rows(logits);
  std::size_t correct = 0;
  for (std::size_t v : mask)
    if (pred[v] == labels[v]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(mask.size());
}

/// Support-weighted mean of per-class F1 over the masked nodes. Classes with
/// no true instances in the mask carry zero weight.
inline double weighted_f1(const num::DenseMatrix& logits, std::span<const int> labels,
                          std::span<const std::size_t> mask) {
  if (mask.empty()) throw ValidationError("weighted_f1: empty mask");
  const auto pred = num::argmax_rows(logits);
  const std::size_t c = logits.cols();
  std::vector<double> tp(c, 0.0), fp(c, 0.0), fn(c, 0.0), support(c, 0.0);
  for (std::size_t v : mask) {
    const auto y = static_cast<std::size_t>(labels[v]);
    const auto p = static_cast<std::size_t>(pred[v]);
    support[y] += 1.0;
    if (y == p) {
      tp[y] += 1.0;
    } else {
      fp[p] += 1.0;
      fn[y] += 1.0;
    }
  }
  double total = 0.0;
  for (std::size_t k = 0; k < c; ++k) {
    if (support[k] == 0.0) continue;
    const double precision = tp[k] + fp[k] > 0.0 ? tp[k] / (tp[k] + fp[k]) : 0.0;
    const double recall = tp[k] / support[k];
    const double f1 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    total += support[k] * f1;
  }
  return total / static_cast<double>(mask.size());
}

}  // namespace sailor::gnn

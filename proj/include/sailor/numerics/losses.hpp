#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "sailor/numerics/dense.hpp"
#include "sailor/numerics/ops.hpp"
#include "sailor/numerics/sparse.hpp"
#include "sailor/numerics/tape.hpp"

namespace sailor::num {

inline constexpr double kProbClip = 1e-7;

/// Mean over `mask` of -log softmax(logits)[label].
inline Var cross_entropy_masked(const Var& logits, std::span<const int> labels,
                                std::span<const std::size_t> mask) {
  if (mask.empty()) throw ValidationError("cross_entropy_masked: empty mask");
  if (labels.size() != logits.rows()) {
    throw ValidationError("cross_entropy_masked: labels length != logits rows");
  }
  const std::size_t n_classes = logits.cols();
  std::vector<std::size_t> rows(mask.begin(), mask.end());
  std::vector<int> targets;
  targets.reserve(rows.size());
  for (std::size_t r : rows) {
    if (r >= logits.rows()) throw ValidationError("cross_entropy_masked: mask index out of range");
    const int y = labels[r];
    if (y < 0 || static_cast<std::size_t>(y) >= n_classes)
      throw ValidationError("cross_entropy_masked: label out of range");
    targets.push_back(y);
  }
  const DenseMatrix picked = gather_rows(logits.value(), rows);
  const DenseMatrix logp = log_softmax_rows(picked);
  double loss = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i)
    loss -= logp(i, static_cast<std::size_t>(targets[i]));
  const double inv = 1.0 / static_cast<double>(rows.size());
  loss *= inv;

  return logits.tape().record(
      DenseMatrix::scalar(loss), {logits},
      [logits, rows = std::move(rows), targets = std::move(targets), logp, inv](
          Tape& t, const DenseMatrix& g) {
        DenseMatrix gl(logits.rows(), logits.cols());
        const double s = g.item() * inv;
        for (std::size_t i = 0; i < rows.size(); ++i) {
          auto dst = gl.row(rows[i]);
          for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += s * std::exp(logp(i, c));
          dst[static_cast<std::size_t>(targets[i])] -= s;
        }
        t.accumulate(logits, gl);
      });
}

namespace detail {
// Clipped binary cross-entropy of a single entry and its derivative w.r.t. p.
struct BceTerm {
  double loss;
  double dloss_dp;
};

inline BceTerm bce_term(double p, double target) {
  const bool clipped = p < kProbClip || p > 1.0 - kProbClip;
  const double pc = std::clamp(p, kProbClip, 1.0 - kProbClip);
  double loss = 0.0;
  if (target != 0.0) loss -= target * std::log(pc);
  if (target != 1.0) loss -= (1.0 - target) * std::log(1.0 - pc);
  const double d = clipped ? 0.0 : -target / pc + (1.0 - target) / (1.0 - pc);
  return {loss, d};
}

inline double bce_grad(double p, double target) {
  if (p < kProbClip || p > 1.0 - kProbClip) return 0.0;
  return -target / p + (1.0 - target) / (1.0 - p);
}
}  // namespace detail

/// Mean clipped binary cross-entropy of a dense probability matrix against a
/// sparse 0/1 target, diagonal entries excluded.
inline Var bce_adjacency(const Var& probs, const SparseMatrix& target) {
  const std::size_t n = probs.rows();
  if (probs.cols() != n) throw ValidationError("bce_adjacency: probability matrix is not square");
  if (target.rows() != n || target.cols() != n)
    throw ValidationError("bce_adjacency: target shape differs from probabilities");
  const double count = static_cast<double>(n) * static_cast<double>(n > 0 ? n - 1 : 0);
  if (count == 0.0) return probs.tape().constant(DenseMatrix::scalar(0.0));
  const DenseMatrix dense_target = target.to_dense();
  double loss = 0.0;
  DenseMatrix dp(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto term = detail::bce_term(probs.value()(i, j), dense_target(i, j));
      loss += term.loss;
      dp(i, j) = term.dloss_dp / count;
    }
  }
  return probs.tape().record(DenseMatrix::scalar(loss / count), {probs},
                             [probs, dp](Tape& t, const DenseMatrix& g) {
                               DenseMatrix gp = dp;
                               for (double& v : gp.values()) v *= g.item();
                               t.accumulate(probs, gp);
                             });
}

namespace detail {
// Visits every unordered off-diagonal pair i < j in row batches with the inner
// product s = <p_i, p_j> and both target entries t_ij, t_ji.
template <typename Visit>
void for_each_decoded_pair(const DenseMatrix& p, const SparseMatrix& target, std::size_t batch_rows,
                           Visit&& visit) {
  const std::size_t n = p.rows();
  for (std::size_t start = 0; start < n; start += batch_rows) {
    const std::size_t stop = std::min(n, start + batch_rows);
    for (std::size_t i = start; i < stop; ++i) {
      const auto pi = p.row(i);
      const auto nbr = target.row_indices(i);
      const auto nbr_val = target.row_values(i);
      std::size_t cursor = 0;
      for (std::size_t j = i + 1; j < n; ++j) {
        while (cursor < nbr.size() && nbr[cursor] < j) ++cursor;
        const double tij = (cursor < nbr.size() && nbr[cursor] == j) ? nbr_val[cursor] : 0.0;
        const double tji = target.row_nnz(j) == 0 ? 0.0 : target.at(j, i);
        const auto pj = p.row(j);
        double s = 0.0;
        for (std::size_t k = 0; k < pi.size(); ++k) s += pi[k] * pj[k];
        visit(i, j, s, tij, tji);
      }
    }
  }
}
}  // namespace detail

/// Same quantity as bce_adjacency(sigmoid(P P^T), target) but decoded in row
/// batches, so memory stays O(batch * N) instead of O(N^2).
inline Var inner_product_bce(const Var& embeddings, const SparseMatrix& target,
                             std::size_t batch_rows = 512) {
  const std::size_t n = embeddings.rows();
  if (target.rows() != n || target.cols() != n)
    throw ValidationError("inner_product_bce: target shape differs from embedding rows");
  if (batch_rows == 0) throw ValidationError("inner_product_bce: batch size must be >= 1");
  const double count = static_cast<double>(n) * static_cast<double>(n > 0 ? n - 1 : 0);
  if (count == 0.0) return embeddings.tape().constant(DenseMatrix::scalar(0.0));

  double loss = 0.0;
  detail::for_each_decoded_pair(embeddings.value(), target, batch_rows,
                                [&loss](std::size_t, std::size_t, double s, double tij, double tji) {
                                  const double prob = sigmoid(s);
                                  const double l = detail::bce_term(prob, tij).loss;
                                  loss += tij == tji ? 2.0 * l : l + detail::bce_term(prob, tji).loss;
                                });

  const SparseMatrix* tp = &target;
  return embeddings.tape().record(
      DenseMatrix::scalar(loss / count), {embeddings},
      [embeddings, tp, count, batch_rows](Tape& t, const DenseMatrix& g) {
        const DenseMatrix& p = embeddings.value();
        DenseMatrix gp(p.rows(), p.cols());
        const double factor = g.item() / count;
        detail::for_each_decoded_pair(
            p, *tp, batch_rows, [&](std::size_t i, std::size_t j, double s, double tij, double tji) {
              const double prob = sigmoid(s);
              // dL/ds = dL/dp * p(1 - p), summed over (i, j) and (j, i)
              const double d = detail::bce_grad(prob, tij);
              const double dp = tij == tji ? 2.0 * d : d + detail::bce_grad(prob, tji);
              const double gs = factor * dp * prob * (1.0 - prob);
              if (gs == 0.0) return;
              const auto pi = p.row(i);
              const auto pj = p.row(j);
              auto gi = gp.row(i);
              auto gj = gp.row(j);
              for (std::size_t k = 0; k < pi.size(); ++k) {
                gi[k] += gs * pj[k];
                gj[k] += gs * pi[k];
              }
            });
        t.accumulate(embeddings, gp);
      });
}

/// (1/N) sum -1/2 (1 + logvar - mu^2 - exp(logvar)): KL of N(mu, sigma^2) from N(0, I), per node.
inline Var kl_gaussian_standard(const Var& mu, const Var& logvar) {
  mu.value().require_same_shape(logvar.value(), "kl_gaussian_standard");
  const std::size_t n = mu.rows();
  if (n == 0) throw ValidationError("kl_gaussian_standard: empty input");
  const double inv = 1.0 / static_cast<double>(n);
  double kl = 0.0;
  for (std::size_t i = 0; i < mu.value().size(); ++i) {
    const double m = mu.value()[i];
    const double lv = logvar.value()[i];
    kl += -0.5 * (1.0 + lv - m * m - std::exp(lv));
  }
  return mu.tape().record(DenseMatrix::scalar(kl * inv), {mu, logvar},
                          [mu, logvar, inv](Tape& t, const DenseMatrix& g) {
                            const double s = g.item() * inv;
                            if (mu.requires_grad()) {
                              DenseMatrix gm = mu.value();
                              for (double& v : gm.values()) v *= s;
                              t.accumulate(mu, gm);
                            }
                            if (logvar.requires_grad()) {
                              DenseMatrix gl = logvar.value();
                              for (double& v : gl.values()) v = -0.5 * (1.0 - std::exp(v)) * s;
                              t.accumulate(logvar, gl);
                            }
                          });
}

/// Mean over rows of KL(softmax(p) || softmax(q)). `q_logits` is a constant prior.
inline Var kl_categorical_rows(const Var& p_logits, const DenseMatrix& q_logits) {
  p_logits.value().require_same_shape(q_logits, "kl_categorical_rows");
  const std::size_t n = p_logits.rows();
  if (n == 0) throw ValidationError("kl_categorical_rows: empty input");
  const DenseMatrix lp = log_softmax_rows(p_logits.value());
  const DenseMatrix lq = log_softmax_rows(q_logits);
  std::vector<double> row_kl(n, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double k = 0.0;
    for (std::size_t c = 0; c < lp.cols(); ++c) k += std::exp(lp(i, c)) * (lp(i, c) - lq(i, c));
    row_kl[i] = k;
    total += k;
  }
  const double inv = 1.0 / static_cast<double>(n);
  return p_logits.tape().record(
      DenseMatrix::scalar(total * inv), {p_logits},
      [p_logits, lp, lq, row_kl = std::move(row_kl), inv](Tape& t, const DenseMatrix& g) {
        DenseMatrix gp(lp.rows(), lp.cols());
        const double s = g.item() * inv;
        for (std::size_t i = 0; i < lp.rows(); ++i)
          for (std::size_t c = 0; c < lp.cols(); ++c)
            gp(i, c) = s * std::exp(lp(i, c)) * ((lp(i, c) - lq(i, c)) - row_kl[i]);
        t.accumulate(p_logits, gp);
      });
}

}  // namespace sailor::num

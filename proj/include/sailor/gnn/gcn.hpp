#pragma once

#include <random>
#include <span>
#include <string>
#include <vector>

#include "sailor/error.hpp"
#include "sailor/numerics/losses.hpp"
#include "sailor/numerics/ops.hpp"
#include "sailor/numerics/rng.hpp"
#include "sailor/numerics/sparse.hpp"
#include "sailor/numerics/tape.hpp"

namespace sailor::gnn {

using num::DenseMatrix;
using num::Parameter;
using num::SparseMatrix;
using num::Tape;
using num::Var;

/// Classifier weights; no bias terms.
struct GnnParams {
  std::vector<Parameter> layers;  // F -> hidden -> ... -> C

  static GnnParams init(std::size_t n_features, std::size_t hidden, std::size_t n_layers,
                        std::size_t n_classes, num::Rng& rng) {
    if (n_layers == 0) throw ValidationError("gnn: need at least one layer");
    GnnParams p;
    std::size_t fan_in = n_features;
    for (std::size_t l = 0; l < n_layers; ++l) {
      const std::size_t fan_out = l + 1 == n_layers ? n_classes : hidden;
      p.layers.emplace_back("gnn.layer" + std::to_string(l), num::glorot_uniform(fan_in, fan_out, rng));
      fan_in = fan_out;
    }
    return p;
  }

  std::vector<Parameter*> all() {
    std::vector<Parameter*> out;
    for (auto& l : layers) out.push_back(&l);
    return out;
  }

  std::size_t n_classes() const { return layers.back().value.cols(); }
};

struct ForwardOptions {
  bool training = false;
  double dropout = 0.0;
  num::Rng* rng = nullptr;  // required when training with dropout > 0
};

inline DenseMatrix dropout_mask(std::size_t rows, std::size_t cols, double rate, num::Rng& rng) {
  std::bernoulli_distribution keep(1.0 - rate);
  const double scale = 1.0 / (1.0 - rate);
  DenseMatrix m(rows, cols);
  for (double& v : m.values()) v = keep(rng) ? scale : 0.0;
  return m;
}

/// Diffuse-then-transform layers on a normalized adjacency; ReLU (and
/// dropout in training) between layers, raw logits out.
inline Var gcn_forward(const SparseMatrix& normalized, const Var& x, GnnParams& params,
                       const ForwardOptions& opt = {}) {
  if (normalized.rows() != x.rows() || normalized.cols() != x.rows())
    throw ValidationError("gcn_forward: adjacency does not match feature rows");
  if (params.layers.front().value.rows() != x.cols())
    throw ValidationError("gcn_forward: feature width does not match first layer");
  Tape& tape = x.tape();
  Var h = x;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    h = num::spmm(normalized, num::matmul(h, tape.parameter(params.layers[l])));
    if (l + 1 < params.layers.size()) {
      h = num::relu(h);
      if (opt.training && opt.dropout > 0.0) {
        if (opt.rng == nullptr) throw ValidationError("gcn_forward: dropout needs an rng");
        h = num::hadamard(h, dropout_mask(h.rows(), h.cols(), opt.dropout, *opt.rng));
      }
    }
  }
  return h;
}

/// Evaluation-mode logits without keeping a tape around.
inline DenseMatrix gcn_logits(const SparseMatrix& normalized, const DenseMatrix& features, GnnParams& params) {
  Tape tape;
  return gcn_forward(normalized, tape.constant(features), params).value();
}

inline Var loss_sup(const Var& z2, std::span<const int> labels, std::span<const std::size_t> train) {
  return num::cross_entropy_masked(z2, labels, train);
}

}  // namespace sailor::gnn

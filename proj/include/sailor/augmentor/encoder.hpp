#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sailor/error.hpp"
#include "sailor/numerics/dense.hpp"
#include "sailor/numerics/ops.hpp"
#include "sailor/numerics/rng.hpp"
#include "sailor/numerics/sparse.hpp"
#include "sailor/numerics/tape.hpp"

namespace sailor::augmentor {

using num::DenseMatrix;
using num::Parameter;
using num::SparseMatrix;
using num::Tape;
using num::Var;

enum class Activation { kRelu, kTanh };

inline Var activate(const Var& x, Activation act) {
  return act == Activation::kRelu ? num::relu(x) : num::tanh(x);
}

/// Weights shared by the graph (VGCN) and linear encoders, plus the per-node
/// structure weight stored before its sigmoid.
struct AugmentorParams {
  std::vector<Parameter> layers;  // F -> H -> ... -> H
  Parameter mu_head;              // H x C
  Parameter logvar_head;          // H x C, log-variance of the latent Gaussian
  Parameter eps_raw;              // N x 1
  Activation activation = Activation::kRelu;

  static AugmentorParams init(std::size_t n_features, std::size_t hidden, std::size_t n_layers,
                              std::size_t latent, std::size_t n_nodes, num::Rng& rng) {
    if (n_layers == 0) throw ValidationError("augmentor: encoder needs at least one layer");
    AugmentorParams p;
    std::size_t fan_in = n_features;
    for (std::size_t l = 0; l < n_layers; ++l) {
      p.layers.emplace_back("aug.layer" + std::to_string(l), num::glorot_uniform(fan_in, hidden, rng));
      fan_in = hidden;
    }
    p.mu_head = Parameter("aug.mu", num::glorot_uniform(hidden, latent, rng));
    p.logvar_head = Parameter("aug.logvar", num::glorot_uniform(hidden, latent, rng));
    p.eps_raw = Parameter("aug.eps_raw", DenseMatrix(n_nodes, 1, 0.0));
    return p;
  }

  std::vector<Parameter*> all() {
    std::vector<Parameter*> out;
    for (auto& l : layers) out.push_back(&l);
    out.push_back(&mu_head);
    out.push_back(&logvar_head);
    out.push_back(&eps_raw);
    return out;
  }

  std::size_t latent_dim() const { return mu_head.value.cols(); }
};

struct Encoding {
  Var sample;  // mu + exp(logvar / 2) * noise, or mu when no noise is given
  Var mu;
  Var logvar;
};

/// Graph encoder: `layers` rounds of act(A H W), then linear mean and
/// log-variance heads. With `noise == nullptr` the sample is the mean.
inline Encoding vgcn_encode(const SparseMatrix& adjacency, const Var& x, AugmentorParams& params,
                            const DenseMatrix* noise) {
  Tape& tape = x.tape();
  if (adjacency.rows() != x.rows() || adjacency.cols() != x.rows())
    throw ValidationError("vgcn_encode: adjacency does not match feature rows");
  Var h = x;
  for (auto& layer : params.layers)
    h = activate(num::spmm(adjacency, num::matmul(h, tape.parameter(layer))), params.activation);
  Encoding e;
  e.mu = num::matmul(h, tape.parameter(params.mu_head));
  e.logvar = num::matmul(h, tape.parameter(params.logvar_head));
  if (noise == nullptr) {
    e.sample = e.mu;
  } else {
    e.sample = num::add(e.mu, num::hadamard(num::exp(num::scale(e.logvar, 0.5)), *noise));
  }
  return e;
}

/// Same layer stack and mean head as vgcn_encode, without any propagation.
inline Var linear_encode(const Var& x, AugmentorParams& params) {
  Tape& tape = x.tape();
  Var h = x;
  for (auto& layer : params.layers) h = activate(num::matmul(h, tape.parameter(layer)), params.activation);
  return num::matmul(h, tape.parameter(params.mu_head));
}

/// eps * p_local + (1 - eps) * p_graph, row-wise, with eps = sigmoid(eps_raw).
inline Var fuse(const Var& p_local, const Var& p_graph, const Var& eps) {
  return num::fuse(p_local, p_graph, eps);
}

inline Var structure_weight(Tape& tape, AugmentorParams& params) {
  return num::sigmoid(tape.parameter(params.eps_raw));
}

/// Fused representation used for edge sampling and the propagation loss.
inline Var fused_representation(const SparseMatrix& normalized_adjacency, const Var& x,
                                 AugmentorParams& params) {
  const Var p_graph = vgcn_encode(normalized_adjacency, x, params, nullptr).mu;
  const Var p_local = linear_encode(x, params);
  return augmentor::fuse(p_local, p_graph, structure_weight(x.tape(), params));
}

}  // namespace sailor::augmentor

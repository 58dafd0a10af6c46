#pragma once

#include <span>

#include "sailor/augmentor/encoder.hpp"
#include "sailor/numerics/losses.hpp"

namespace sailor::augmentor {

struct AugLoss {
  Var total;
  Var reconstruction;  // BCE(sigmoid(P1 P1^T), A)
  Var kl;              // KL(q(P1) || N(0, I))
};

/// Augmentation constraint: encode the forged graph with sampling, decode
/// sigmoid(P1 P1^T) in row batches and compare with the original adjacency.
inline AugLoss loss_aug(const SparseMatrix& forged_normalized, const SparseMatrix& original, const Var& x,
                        AugmentorParams& params, const DenseMatrix& noise, std::size_t batch_rows = 512) {
  const Encoding enc = vgcn_encode(forged_normalized, x, params, &noise);
  AugLoss out;
  out.reconstruction = num::inner_product_bce(enc.sample, original, batch_rows);
  out.kl = num::kl_gaussian_standard(enc.mu, enc.logvar);
  out.total = num::add(out.reconstruction, out.kl);
  return out;
}

struct PropLoss {
  Var loss;
  Var p2;
};

/// Propagation constraint: cross-entropy of the fused representation on the
/// training nodes.
inline PropLoss loss_p(const SparseMatrix& normalized, const Var& x, AugmentorParams& params,
                       std::span<const int> labels, std::span<const std::size_t> train) {
  if (train.empty()) throw ValidationError("loss_p: empty training mask");
  PropLoss out;
  out.p2 = fused_representation(normalized, x, params);
  out.loss = num::cross_entropy_masked(out.p2, labels, train);
  return out;
}

/// Alignment constraint: KL between the augmentor's sampled encoding of the
/// augmented graph and the classifier's logits, which act as a fixed prior.
inline Var loss_ali(const SparseMatrix& augmented_normalized, const Var& x, AugmentorParams& params,
                    const DenseMatrix& z2_prior, const DenseMatrix& noise) {
  const Encoding enc = vgcn_encode(augmented_normalized, x, params, &noise);
  return num::kl_categorical_rows(enc.sample, z2_prior);
}

}  // namespace sailor::augmentor

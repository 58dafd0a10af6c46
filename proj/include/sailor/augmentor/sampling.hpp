#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <span>
#include <vector>

#include "sailor/error.hpp"
#include "sailor/graph/graph.hpp"
#include "sailor/numerics/dense.hpp"
#include "sailor/numerics/rng.hpp"
#include "sailor/numerics/sparse.hpp"

namespace sailor::augmentor {

struct AugmentedGraph {
  num::SparseMatrix adjacency;           // original edges plus sampled ones
  std::vector<graph::Edge> added_edges;  // (min, max) pairs in sampling order
};

/// Edge probabilities for one tail node: softmax over <p_v, p_j> restricted to
/// candidates j that are neither v nor an existing neighbor. Masked entries are 0.
inline void candidate_probabilities(const num::DenseMatrix& p2, const num::SparseMatrix& adjacency,
                                    std::size_t v, std::span<const double> scores, std::vector<double>& probs) {
  const std::size_t n = p2.rows();
  probs.assign(n, 0.0);
  const auto nbrs = adjacency.row_indices(v);
  std::vector<char> masked(n, 0);
  masked[v] = 1;
  for (std::size_t u : nbrs) masked[u] = 1;
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j)
    if (!masked[j]) mx = std::max(mx, scores[j]);
  if (!std::isfinite(mx)) return;  // every column masked
  double z = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (masked[j]) continue;
    probs[j] = std::exp(scores[j] - mx);
    z += probs[j];
  }
  for (double& p : probs) p /= z;
}

/// Draws pseudo-homophilic edges for tail nodes. Tail nodes are processed in
/// batches of `batch_size`; each unmasked candidate gets one uniform draw per
/// round, in column order, and is kept when the draw falls below its softmax
/// probability. Sampled edges are unioned with the original adjacency.
inline AugmentedGraph sample_augmented_edges(const num::DenseMatrix& p2, const num::SparseMatrix& adjacency,
                                             std::span<const graph::NodeId> tail_nodes, std::size_t batch_size,
                                             num::Rng& rng, std::size_t rounds = 1) {
  if (batch_size == 0) throw ValidationError("sample_augmented_edges: batch size must be >= 1");
  if (p2.rows() != adjacency.rows()) throw ValidationError("sample_augmented_edges: P2 rows != node count");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::set<graph::Edge> seen;
  AugmentedGraph out;
  std::vector<double> probs;
  for (std::size_t start = 0; start < tail_nodes.size(); start += batch_size) {
    const std::size_t stop = std::min(tail_nodes.size(), start + batch_size);
    const std::span<const graph::NodeId> batch = tail_nodes.subspan(start, stop - start);
    const num::DenseMatrix scores = num::matmul_nt(num::gather_rows(p2, batch), p2);
    for (std::size_t b = 0; b < batch.size(); ++b) {
      const std::size_t v = batch[b];
      candidate_probabilities(p2, adjacency, v, scores.row(b), probs);
      const auto nbrs = adjacency.row_indices(v);
      for (std::size_t r = 0; r < rounds; ++r) {
        std::size_t cursor = 0;
        for (std::size_t j = 0; j < probs.size(); ++j) {
          while (cursor < nbrs.size() && nbrs[cursor] < j) ++cursor;
          if (j == v || (cursor < nbrs.size() && nbrs[cursor] == j)) continue;
          if (unit(rng) < probs[j]) {
            const graph::Edge e{std::min(v, j), std::max(v, j)};
            if (seen.insert(e).second) out.added_edges.push_back(e);
          }
        }
      }
    }
  }

  std::vector<num::Triplet> t;
  t.reserve(adjacency.nnz() + 2 * out.added_edges.size());
  for (std::size_t u = 0; u < adjacency.rows(); ++u)
    for (std::size_t v : adjacency.row_indices(u)) t.push_back({u, v, 1.0});
  for (const auto& e : out.added_edges) {
    t.push_back({e.u, e.v, 1.0});
    t.push_back({e.v, e.u, 1.0});
  }
  out.adjacency = num::SparseMatrix::from_triplets(adjacency.rows(), adjacency.cols(), std::move(t));
  return out;
}

}  // namespace sailor::augmentor

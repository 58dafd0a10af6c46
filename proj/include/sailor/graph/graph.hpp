#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sailor/error.hpp"
#include "sailor/numerics/dense.hpp"
#include "sailor/numerics/sparse.hpp"

namespace sailor::graph {

using NodeId = std::size_t;

struct Edge {
  NodeId u;
  NodeId v;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Undirected, unweighted graph with node features and labels.
struct AttributedGraph {
  num::SparseMatrix adjacency;  // symmetric 0/1, zero diagonal
  num::DenseMatrix features;    // N x F
  std::vector<int> labels;      // one class id per node
  int n_classes = 0;
  // Bundle id of each node; preprocessing keeps this mapping when it relabels.
  std::vector<std::int64_t> original_ids;

  std::size_t n_nodes() const { return labels.size(); }
  std::size_t n_features() const { return features.cols(); }

  /// Throws ValidationError if any structural invariant is broken.
  void validate() const {
    const std::size_t n = labels.size();
    if (adjacency.rows() != n || adjacency.cols() != n)
      throw ValidationError("graph: adjacency shape does not match node count");
    if (features.rows() != n) throw ValidationError("graph: feature rows != node count");
    if (original_ids.size() != n) throw ValidationError("graph: original id map size != node count");
    for (int y : labels)
      if (y < 0 || y >= n_classes) throw ValidationError("graph: label out of range");
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t k = 0; k < adjacency.row_nnz(r); ++k) {
        const std::size_t c = adjacency.row_indices(r)[k];
        if (c == r) throw ValidationError("graph: self-loop in adjacency");
        if (adjacency.row_values(r)[k] != 1.0) throw ValidationError("graph: non-binary adjacency");
        if (!adjacency.contains(c, r)) throw ValidationError("graph: adjacency not symmetric");
      }
    }
  }
};

/// Degree of every node (row sums of the adjacency).
inline std::vector<std::size_t> degrees(const AttributedGraph& g) {
  std::vector<std::size_t> d(g.n_nodes());
  for (std::size_t v = 0; v < d.size(); ++v) d[v] = g.adjacency.row_nnz(v);
  return d;
}

/// Number of undirected edges.
inline std::size_t edge_count(const AttributedGraph& g) { return g.adjacency.nnz() / 2; }

/// Each undirected edge once, as (u, v) with u < v, in row-major order.
inline std::vector<Edge> edge_list(const num::SparseMatrix& adjacency) {
  std::vector<Edge> edges;
  for (std::size_t u = 0; u < adjacency.rows(); ++u)
    for (std::size_t v : adjacency.row_indices(u))
      if (u < v) edges.push_back({u, v});
  return edges;
}

/// Symmetric 0/1 adjacency from an undirected edge list. Self-loops and
/// duplicates must already be removed.
inline num::SparseMatrix adjacency_from_edges(std::size_t n, const std::vector<Edge>& edges) {
  std::vector<num::Triplet> t;
  t.reserve(edges.size() * 2);
  for (const auto& e : edges) {
    t.push_back({e.u, e.v, 1.0});
    t.push_back({e.v, e.u, 1.0});
  }
  return num::SparseMatrix::from_triplets(n, n, std::move(t));
}

}  // namespace sailor::graph

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "sailor/error.hpp"
#include "sailor/graph/graph.hpp"
#include "sailor/graph/partition.hpp"
#include "sailor/numerics/rng.hpp"

namespace sailor::augmentor {

/// Graph with part of every head node's edges removed, so head nodes look
/// like tail nodes to the augmentor.
struct ForgedGraph {
  num::SparseMatrix adjacency;
  std::vector<graph::Edge> dropped_edges;  // (min, max) pairs in drop order
  // Drops that could not be made without isolating an endpoint. Zero unless
  // neighboring head nodes already consumed each other's removable edges.
  std::size_t shortfall = 0;
};

/// Number of incident edges a head node of degree `degree` gives up.
inline std::size_t forge_quota(std::size_t degree, double delta) {
  return static_cast<std::size_t>(std::floor(delta * static_cast<double>(degree)));
}

/// For each head node v (ascending id) removes floor(delta * deg(v)) incident
/// edges chosen uniformly at random. An edge is skipped if removing it would
/// leave either endpoint without neighbors.
inline ForgedGraph forge_tails(const num::SparseMatrix& adjacency, const graph::NodePartition& partition,
                               double delta, std::uint64_t seed, std::uint64_t index = 0) {
  if (!(delta >= 0.0 && delta < 1.0)) throw ValidationError("forge_tails: delta must lie in [0, 1)");
  const std::size_t n = adjacency.rows();
  std::vector<std::vector<std::size_t>> nbrs(n);
  for (std::size_t v = 0; v < n; ++v) {
    const auto idx = adjacency.row_indices(v);
    nbrs[v].assign(idx.begin(), idx.end());
  }
  auto remove = [&nbrs](std::size_t a, std::size_t b) {
    nbrs[a].erase(std::find(nbrs[a].begin(), nbrs[a].end(), b));
    nbrs[b].erase(std::find(nbrs[b].begin(), nbrs[b].end(), a));
  };

  ForgedGraph out;
  auto rng = num::make_rng(seed, num::Stream::kForge, index);
  for (std::size_t v : partition.head_nodes) {
    const std::size_t quota = forge_quota(adjacency.row_nnz(v), delta);
    if (quota == 0) continue;
    std::vector<std::size_t> candidates = nbrs[v];
    std::shuffle(candidates.begin(), candidates.end(), rng);
    std::size_t removed = 0;
    for (std::size_t u : candidates) {
      if (removed == quota) break;
      if (nbrs[v].size() < 2 || nbrs[u].size() < 2) continue;
      remove(v, u);
      out.dropped_edges.push_back({std::min(u, v), std::max(u, v)});
      ++removed;
    }
    out.shortfall += quota - removed;
  }

  std::vector<num::Triplet> t;
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t u : nbrs[v]) t.push_back({v, u, 1.0});
  out.adjacency = num::SparseMatrix::from_triplets(n, n, std::move(t));
  return out;
}

}  // namespace sailor::augmentor

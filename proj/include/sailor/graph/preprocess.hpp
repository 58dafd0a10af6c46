#pragma once

#include <algorithm>
#include <cstddef>
#include <queue>
#include <vector>

#include "sailor/error.hpp"
#include "sailor/graph/graph.hpp"

namespace sailor::graph {

/// Component id of every node; components are numbered in order of their smallest node.
inline std::vector<std::size_t> connected_components(const num::SparseMatrix& adjacency,
                                                     std::size_t* n_components = nullptr) {
  const std::size_t n = adjacency.rows();
  constexpr std::size_t kUnseen = static_cast<std::size_t>(-1);
  std::vector<std::size_t> comp(n, kUnseen);
  std::size_t next = 0;
  std::queue<std::size_t> frontier;
  for (std::size_t s = 0; s < n; ++s) {
    if (comp[s] != kUnseen) continue;
    comp[s] = next;
    frontier.push(s);
    while (!frontier.empty()) {
      const std::size_t u = frontier.front();
      frontier.pop();
      for (std::size_t v : adjacency.row_indices(u)) {
        if (comp[v] == kUnseen) {
          comp[v] = next;
          frontier.push(v);
        }
      }
    }
    ++next;
  }
  if (n_components != nullptr) *n_components = next;
  return comp;
}

/// Subgraph induced by `keep` (ascending node ids); nodes are relabeled to 0..k-1
/// in the same order.
inline AttributedGraph induced_subgraph(const AttributedGraph& g, const std::vector<std::size_t>& keep) {
  constexpr std::size_t kDropped = static_cast<std::size_t>(-1);
  std::vector<std::size_t> remap(g.n_nodes(), kDropped);
  for (std::size_t i = 0; i < keep.size(); ++i) remap[keep[i]] = i;

  std::vector<num::Triplet> t;
  for (std::size_t i = 0; i < keep.size(); ++i)
    for (std::size_t v : g.adjacency.row_indices(keep[i]))
      if (remap[v] != kDropped) t.push_back({i, remap[v], 1.0});

  AttributedGraph out;
  out.adjacency = num::SparseMatrix::from_triplets(keep.size(), keep.size(), std::move(t));
  out.features = num::gather_rows(g.features, keep);
  out.labels.reserve(keep.size());
  out.original_ids.reserve(keep.size());
  for (std::size_t v : keep) {
    out.labels.push_back(g.labels[v]);
    out.original_ids.push_back(g.original_ids[v]);
  }
  out.n_classes = g.n_classes;
  return out;
}

/// Restricts the graph to its largest connected component. Ties between equally
/// large components go to the one holding the smallest node id.
inline AttributedGraph preprocess(const AttributedGraph& g) {
  if (g.n_nodes() == 0) throw ValidationError("preprocess: empty graph");
  std::size_t n_comp = 0;
  const auto comp = connected_components(g.adjacency, &n_comp);
  std::vector<std::size_t> sizes(n_comp, 0);
  for (std::size_t c : comp) ++sizes[c];
  // Components are numbered by first-seen node, so the first maximum wins ties.
  const std::size_t best =
      static_cast<std::size_t>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  std::vector<std::size_t> keep;
  keep.reserve(sizes[best]);
  for (std::size_t v = 0; v < comp.size(); ++v)
    if (comp[v] == best) keep.push_back(v);
  return induced_subgraph(g, keep);
}

}  // namespace sailor::graph

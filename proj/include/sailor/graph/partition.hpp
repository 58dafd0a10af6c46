#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "sailor/error.hpp"
#include "sailor/graph/graph.hpp"
#include "sailor/graph/io.hpp"
#include "sailor/numerics/rng.hpp"

namespace sailor::graph {

/// Degree-based head/tail division. Both node lists are sorted ascending.
struct NodePartition {
  std::vector<NodeId> tail_nodes;
  std::vector<NodeId> head_nodes;
  std::size_t degree_threshold = 0;

  bool is_tail(NodeId v) const {
    return std::binary_search(tail_nodes.begin(), tail_nodes.end(), v);
  }
};

/// Walks distinct degrees in ascending order, accumulating node counts; the
/// first degree at which the running count exceeds 80% of N becomes the
/// threshold. Nodes at or below the threshold are tail nodes.
inline NodePartition pareto_split(const AttributedGraph& g, double tail_fraction = 0.8) {
  const auto deg = degrees(g);
  const std::size_t n = deg.size();
  std::map<std::size_t, std::size_t> histogram;
  for (std::size_t d : deg) ++histogram[d];

  NodePartition p;
  std::size_t cumulative = 0;
  for (const auto& [d, count] : histogram) {
    cumulative += count;
    p.degree_threshold = d;
    if (static_cast<double>(cumulative) > tail_fraction * static_cast<double>(n)) break;
  }
  for (NodeId v = 0; v < n; ++v) (deg[v] <= p.degree_threshold ? p.tail_nodes : p.head_nodes).push_back(v);
  return p;
}

enum class SplitMode { kTailProtocol, kPublic };

inline const char* to_string(SplitMode m) { return m == SplitMode::kPublic ? "public" : "tail"; }

/// Train/valid/test node ids, each sorted ascending.
struct DatasetSplit {
  std::vector<NodeId> train;
  std::vector<NodeId> valid;
  std::vector<NodeId> test;
  SplitMode mode = SplitMode::kTailProtocol;
};

/// Tail protocol: all head nodes train; the tail nodes are shuffled with `seed`
/// and the first fifth (rounded down) becomes validation, the rest test.
/// Public mode: tags from masks.tsv, translated through the graph's original ids.
inline DatasetSplit make_splits(const AttributedGraph& g, const NodePartition& partition, SplitMode mode,
                                std::uint64_t seed,
                                const std::optional<std::map<std::int64_t, SplitTag>>& masks = std::nullopt) {
  DatasetSplit s;
  s.mode = mode;
  if (mode == SplitMode::kTailProtocol) {
    s.train = partition.head_nodes;
    std::vector<NodeId> tail = partition.tail_nodes;
    auto rng = num::make_rng(seed, num::Stream::kSplit);
    std::shuffle(tail.begin(), tail.end(), rng);
    const std::size_t n_valid = tail.size() / 5;
    s.valid.assign(tail.begin(), tail.begin() + static_cast<std::ptrdiff_t>(n_valid));
    s.test.assign(tail.begin() + static_cast<std::ptrdiff_t>(n_valid), tail.end());
  } else {
    if (!masks) throw ValidationError("make_splits: public split requested but bundle has no masks.tsv");
    for (NodeId v = 0; v < g.n_nodes(); ++v) {
      const auto it = masks->find(g.original_ids[v]);
      if (it == masks->end()) continue;
      switch (it->second) {
        case SplitTag::kTrain: s.train.push_back(v); break;
        case SplitTag::kValid: s.valid.push_back(v); break;
        case SplitTag::kTest: s.test.push_back(v); break;
      }
    }
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.valid.begin(), s.valid.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

}  // namespace sailor::graph

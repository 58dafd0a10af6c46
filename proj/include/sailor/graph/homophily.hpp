#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "sailor/error.hpp"
#include "sailor/graph/graph.hpp"
#include "sailor/graph/partition.hpp"

namespace sailor::graph {

/// Fraction of v's neighbors (under `adjacency`) that share v's label.
inline double node_homophily(const num::SparseMatrix& adjacency, std::span<const int> labels, NodeId v) {
  const auto nbrs = adjacency.row_indices(v);
  if (nbrs.empty()) {
    throw ValidationError("node_homophily: node " + std::to_string(v) + " is isolated");
  }
  std::size_t same = 0;
  for (std::size_t u : nbrs)
    if (labels[u] == labels[v]) ++same;
  return static_cast<double>(same) / static_cast<double>(nbrs.size());
}

inline double node_homophily(const AttributedGraph& g, NodeId v) {
  return node_homophily(g.adjacency, g.labels, v);
}

/// Empirical CDF as a right-continuous step function: `points` holds each
/// distinct value with the fraction of samples <= that value.
struct Cdf {
  std::vector<std::pair<double, double>> points;

  static Cdf from_samples(std::vector<double> samples) {
    Cdf cdf;
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (i + 1 < samples.size() && samples[i + 1] == samples[i]) continue;
      cdf.points.emplace_back(samples[i], static_cast<double>(i + 1) / n);
    }
    return cdf;
  }

  double at(double x) const {
    double y = 0.0;
    for (const auto& [value, cum] : points) {
      if (value > x) break;
      y = cum;
    }
    return y;
  }
};

struct GroupStats {
  std::size_t size = 0;
  std::size_t total_het_count = 0;
  double total_het_prop = 0.0;
  Cdf homophily_cdf;
};

struct HomophilyReport {
  std::vector<double> per_node_homophily;
  GroupStats head;
  GroupStats tail;
  GroupStats all;
};

inline GroupStats group_stats(const std::vector<double>& homophily, std::span<const NodeId> nodes) {
  GroupStats s;
  s.size = nodes.size();
  std::vector<double> samples;
  samples.reserve(nodes.size());
  for (NodeId v : nodes) {
    samples.push_back(homophily[v]);
    if (homophily[v] == 0.0) ++s.total_het_count;
  }
  s.total_het_prop = nodes.empty() ? 0.0 : static_cast<double>(s.total_het_count) / static_cast<double>(nodes.size());
  s.homophily_cdf = Cdf::from_samples(std::move(samples));
  return s;
}

/// Per-node homophily under `adjacency` with counts of total-heterophilic
/// (homophily 0) nodes per head/tail group.
inline HomophilyReport heterophily_report(const num::SparseMatrix& adjacency, std::span<const int> labels,
                                          const NodePartition& partition) {
  HomophilyReport r;
  const std::size_t n = labels.size();
  r.per_node_homophily.resize(n);
  for (NodeId v = 0; v < n; ++v) r.per_node_homophily[v] = node_homophily(adjacency, labels, v);
  r.head = group_stats(r.per_node_homophily, partition.head_nodes);
  r.tail = group_stats(r.per_node_homophily, partition.tail_nodes);
  std::vector<NodeId> everyone(n);
  for (NodeId v = 0; v < n; ++v) everyone[v] = v;
  r.all = group_stats(r.per_node_homophily, everyone);
  return r;
}

inline HomophilyReport heterophily_report(const AttributedGraph& g, const NodePartition& partition) {
  return heterophily_report(g.adjacency, g.labels, partition);
}

/// Probability that a node of the given degree shares no label with any
/// neighbor when labels are uniform over c classes: ((c-1)/c)^d.
inline double expected_total_het_prob(int n_classes, std::size_t degree) {
  if (n_classes < 2) throw ValidationError("expected_total_het_prob: need at least 2 classes");
  const double c = static_cast<double>(n_classes);
  return std::pow((c - 1.0) / c, static_cast<double>(degree));
}

}  // namespace sailor::graph

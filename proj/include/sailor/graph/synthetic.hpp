#pragma once

// Long-tailed attributed graphs for tests and demos: a degree-corrected
// stochastic block model with Pareto node weights and bag-of-words features
// drawn around per-class topic words.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "sailor/error.hpp"
#include "sailor/graph/graph.hpp"
#include "sailor/graph/io.hpp"
#include "sailor/numerics/rng.hpp"

namespace sailor::graph {

struct SyntheticSpec {
  std::size_t n_nodes = 1000;
  int n_classes = 5;
  std::size_t n_features = 200;
  double avg_degree = 4.0;
  double pareto_shape = 2.0;    // tail exponent of the node weight distribution
  double max_weight = 40.0;
  double edge_homophily = 0.8;  // chance an edge stays inside the source class
  std::size_t words_per_node = 12;
  double topic_fidelity = 0.35;  // chance a word is drawn from the class topic
  std::uint64_t seed = 0;
};

inline AttributedGraph make_synthetic_graph(const SyntheticSpec& spec) {
  if (spec.n_nodes < 2 || spec.n_classes < 2 || spec.n_features < static_cast<std::size_t>(spec.n_classes))
    throw ValidationError("make_synthetic_graph: degenerate parameters");
  auto rng = num::make_rng(spec.seed, num::Stream::kSynthetic);
  const std::size_t n = spec.n_nodes;

  std::uniform_int_distribution<int> pick_class(0, spec.n_classes - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<int> labels(n);
  std::vector<double> weight(n);
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(spec.n_classes));
  for (std::size_t v = 0; v < n; ++v) {
    labels[v] = pick_class(rng);
    members[static_cast<std::size_t>(labels[v])].push_back(v);
    // Inverse-CDF Pareto with x_min = 1.
    weight[v] = std::min(spec.max_weight, std::pow(1.0 - unit(rng), -1.0 / spec.pareto_shape));
  }

  std::discrete_distribution<std::size_t> any_node(weight.begin(), weight.end());
  std::vector<std::discrete_distribution<std::size_t>> in_class;
  for (const auto& m : members) {
    std::vector<double> w;
    for (std::size_t v : m) w.push_back(weight[v]);
    if (w.empty()) w.push_back(1.0);
    in_class.emplace_back(w.begin(), w.end());
  }

  const auto target_edges = static_cast<std::size_t>(spec.avg_degree * static_cast<double>(n) / 2.0);
  std::set<Edge> edges;
  std::size_t attempts = 0;
  while (edges.size() < target_edges && attempts < target_edges * 50) {
    ++attempts;
    const std::size_t u = any_node(rng);
    std::size_t v = 0;
    const auto cu = static_cast<std::size_t>(labels[u]);
    if (unit(rng) < spec.edge_homophily) {
      if (members[cu].empty()) continue;
      v = members[cu][in_class[cu](rng)];
    } else {
      v = any_node(rng);
      if (static_cast<std::size_t>(labels[v]) == cu) continue;
    }
    if (u == v) continue;
    edges.insert({std::min(u, v), std::max(u, v)});
  }

  const std::size_t topic_width = spec.n_features / static_cast<std::size_t>(spec.n_classes);
  std::uniform_int_distribution<std::size_t> any_word(0, spec.n_features - 1);
  std::uniform_int_distribution<std::size_t> topic_word(0, topic_width - 1);
  num::DenseMatrix features(n, spec.n_features);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t k = 0; k < spec.words_per_node; ++k) {
      const std::size_t w = unit(rng) < spec.topic_fidelity
                                ? static_cast<std::size_t>(labels[v]) * topic_width + topic_word(rng)
                                : any_word(rng);
      features(v, w) = 1.0;
    }
  }

  AttributedGraph g;
  g.adjacency = adjacency_from_edges(n, std::vector<Edge>(edges.begin(), edges.end()));
  g.features = std::move(features);
  g.labels = std::move(labels);
  g.n_classes = spec.n_classes;
  g.original_ids.resize(n);
  for (std::size_t v = 0; v < n; ++v) g.original_ids[v] = static_cast<std::int64_t>(v);
  g.validate();
  return g;
}

/// Planetoid-style public masks: `per_class` training nodes per class, then
/// `n_valid` validation and `n_test` test nodes, drawn in a seeded order.
inline std::map<std::int64_t, SplitTag> make_public_masks(const AttributedGraph& g, std::size_t per_class,
                                                          std::size_t n_valid, std::size_t n_test,
                                                          std::uint64_t seed) {
  std::vector<std::size_t> order(g.n_nodes());
  for (std::size_t v = 0; v < order.size(); ++v) order[v] = v;
  auto rng = num::make_rng(seed, num::Stream::kSynthetic, 1);
  std::shuffle(order.begin(), order.end(), rng);
  std::map<std::int64_t, SplitTag> masks;
  std::vector<std::size_t> taken(static_cast<std::size_t>(g.n_classes), 0);
  std::vector<std::size_t> rest;
  for (std::size_t v : order) {
    auto& t = taken[static_cast<std::size_t>(g.labels[v])];
    if (t < per_class) {
      masks[g.original_ids[v]] = SplitTag::kTrain;
      ++t;
    } else {
      rest.push_back(v);
    }
  }
  for (std::size_t i = 0; i < rest.size() && i < n_valid + n_test; ++i)
    masks[g.original_ids[rest[i]]] = i < n_valid ? SplitTag::kValid : SplitTag::kTest;
  return masks;
}

}  // namespace sailor::graph

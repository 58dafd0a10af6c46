#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sailor/error.hpp"
#include "sailor/graph/io.hpp"
#include "sailor/trainer/trainer.hpp"

namespace sailor::trainer {

/// A loaded graph with everything needed to split it for any seed.
struct Dataset {
  AttributedGraph graph;
  NodePartition partition;
  std::optional<std::map<std::int64_t, graph::SplitTag>> masks;

  DatasetSplit split_for(const TrainConfig& c) const {
    return graph::make_splits(graph, partition, c.split, c.seed, masks);
  }
};

inline Dataset make_dataset(AttributedGraph g, std::optional<std::map<std::int64_t, graph::SplitTag>> masks = {}) {
  Dataset d;
  d.partition = graph::pareto_split(g);
  d.graph = std::move(g);
  d.masks = std::move(masks);
  return d;
}

struct RunOutcome {
  TrainResult training;
  Metrics metrics;
};

inline RunOutcome train_and_evaluate(const Dataset& d, const TrainConfig& c, const EpochCallback& on_epoch = {}) {
  const DatasetSplit split = d.split_for(c);
  RunOutcome out;
  out.training = train(d.graph, d.partition, split, c, on_epoch);
  out.metrics = evaluate(d.graph, d.partition, split, c, out.training.best, out.training.best_epoch).metrics;
  return out;
}

/// `n` values evenly spaced in log10 between lo and hi, both included.
inline std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  if (!(lo > 0 && hi > 0)) throw ValidationError("log_grid: bounds must be positive");
  if (n == 0) throw ValidationError("log_grid: empty grid");
  if (n == 1) return {lo};
  std::vector<double> out(n);
  const double a = std::log10(lo), b = std::log10(hi);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

inline std::vector<double> linear_grid(double lo, double hi, std::size_t n) {
  if (n == 0) throw ValidationError("linear_grid: empty grid");
  if (n == 1) return {lo};
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  out.back() = hi;
  return out;
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for a single value
};

inline MeanStd mean_std(const std::vector<double>& xs) {
  if (xs.empty()) throw ValidationError("mean_std: no values");
  MeanStd r;
  for (double x : xs) r.mean += x;
  r.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - r.mean) * (x - r.mean);
    r.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return r;
}

struct SweepRow {
  double value = 0.0;
  std::size_t n_seeds = 0;
  MeanStd test_accuracy;
  MeanStd test_weighted_f1;
  MeanStd valid_accuracy;
};

/// Trains once per (grid value, seed) with `key` set to the value and every
/// other setting taken from `base`.
inline std::vector<SweepRow> run_sweep(const Dataset& d, const TrainConfig& base, const std::string& key,
                                       const std::vector<double>& grid, const std::vector<std::uint64_t>& seeds) {
  if (grid.empty()) throw ValidationError("sweep: empty grid");
  if (seeds.empty()) throw ValidationError("sweep: no seeds");
  find_key(key);
  std::vector<SweepRow> rows;
  for (double value : grid) {
    TrainConfig c = base;
    set_value(c, key, detail::format_real(value));
    std::vector<double> acc, f1, valid;
    for (std::uint64_t seed : seeds) {
      c.seed = seed;
      const RunOutcome r = train_and_evaluate(d, c);
      acc.push_back(r.metrics.test_accuracy);
      f1.push_back(r.metrics.test_weighted_f1);
      valid.push_back(r.metrics.valid_accuracy);
    }
    rows.push_back({value, seeds.size(), mean_std(acc), mean_std(f1), mean_std(valid)});
  }
  return rows;
}

}  // namespace sailor::trainer

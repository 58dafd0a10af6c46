#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sailor/augmentor/encoder.hpp"
#include "sailor/augmentor/forge.hpp"
#include "sailor/augmentor/objectives.hpp"
#include "sailor/augmentor/sampling.hpp"
#include "sailor/error.hpp"
#include "sailor/gnn/gcn.hpp"
#include "sailor/gnn/metrics.hpp"
#include "sailor/graph/graph.hpp"
#include "sailor/graph/partition.hpp"
#include "sailor/numerics/adam.hpp"
#include "sailor/numerics/checkpoint.hpp"
#include "sailor/numerics/rng.hpp"
#include "sailor/trainer/config.hpp"

namespace sailor::trainer {

using graph::AttributedGraph;
using graph::DatasetSplit;
using graph::NodePartition;
using num::DenseMatrix;
using num::SparseMatrix;

struct EpochLog {
  std::size_t epoch = 0;
  double l_sup = 0.0;
  double l_aug = 0.0;
  double l_p = 0.0;
  double l_ali = 0.0;
  std::size_t added_edge_count = 0;
  double valid_accuracy = 0.0;
  double wall_time = 0.0;  // seconds
  // Largest gradient magnitude that crossed between the classifier and the
  // augmentor in this epoch's two backward passes. Both must be exactly 0.
  double aug_grad_from_sup = 0.0;
  double gnn_grad_from_aug = 0.0;
};

/// Stops once `patience` consecutive epochs bring no strict improvement.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience) : patience_(patience) {}

  /// Returns true when `score` is a new best.
  bool update(double score) {
    if (score > best_) {
      best_ = score;
      since_ = 0;
      return true;
    }
    ++since_;
    return false;
  }

  bool should_stop() const { return since_ >= patience_; }
  double best() const { return best_; }
  std::size_t epochs_since_improvement() const { return since_; }

 private:
  std::size_t patience_;
  double best_ = -std::numeric_limits<double>::infinity();
  std::size_t since_ = 0;
};

struct ModelParams {
  gnn::GnnParams gnn;
  augmentor::AugmentorParams aug;
};

inline ModelParams init_params(const AttributedGraph& g, const TrainConfig& c) {
  ModelParams m;
  const auto n_classes = static_cast<std::size_t>(g.n_classes);
  auto gnn_rng = num::make_rng(c.seed, num::Stream::kInit, 0);
  m.gnn = gnn::GnnParams::init(g.n_features(), c.gnn_hidden, c.gnn_layers, n_classes, gnn_rng);
  auto aug_rng = num::make_rng(c.seed, num::Stream::kInit, 1);
  m.aug = augmentor::AugmentorParams::init(g.n_features(), c.enc_hidden, c.enc_layers, n_classes, g.n_nodes(), aug_rng);
  m.aug.activation = c.activation;
  return m;
}

/// The graph the classifier sees in one epoch.
struct EpochGraph {
  SparseMatrix adjacency;
  SparseMatrix normalized;
  std::vector<graph::Edge> added_edges;
};

/// Rebuilds A2 for `epoch` from the original graph: P2 from the current
/// augmentor, then seeded Bernoulli sampling over the tail nodes. The vanilla
/// model uses the original graph unchanged.
inline EpochGraph epoch_graph(const AttributedGraph& g, const NodePartition& partition, const TrainConfig& c,
                              augmentor::AugmentorParams& aug, const SparseMatrix& original_normalized,
                              std::size_t epoch) {
  if (c.model == Model::kGcn) return {g.adjacency, original_normalized, {}};
  DenseMatrix p2;
  {
    num::Tape tape;
    p2 = augmentor::fused_representation(original_normalized, tape.constant(g.features), aug).value();
  }
  auto rng = num::make_rng(c.seed, num::Stream::kSample, epoch);
  auto sampled =
      augmentor::sample_augmented_edges(p2, g.adjacency, partition.tail_nodes, c.batch, rng, c.sample_rounds);
  EpochGraph out;
  out.normalized = num::normalize_adjacency(sampled.adjacency);
  out.adjacency = std::move(sampled.adjacency);
  out.added_edges = std::move(sampled.added_edges);
  return out;
}

inline double max_abs_grad(std::span<num::Parameter* const> params) {
  double m = 0.0;
  for (const num::Parameter* p : params) m = std::max(m, num::max_abs(p->grad));
  return m;
}

struct TrainResult {
  ModelParams best;  // classifier after the best epoch, augmentor as used to sample that epoch's graph
  std::size_t best_epoch = 0;
  double best_valid_accuracy = 0.0;
  std::vector<EpochLog> logs;
  std::size_t forged_edges_dropped = 0;
  std::size_t forge_shortfall = 0;
};

using EpochCallback = std::function<void(const EpochLog&, const EpochGraph&)>;

/// Joint optimisation. Each epoch: sample A2 with the current augmentor, take
/// one classifier step on alpha * L_sup over A2, then one augmentor step on
/// beta * L_aug + eta * L_p + delta * L_ali, then score validation accuracy.
inline TrainResult train(const AttributedGraph& g, const NodePartition& partition, const DatasetSplit& split,
                         const TrainConfig& c, const EpochCallback& on_epoch = {}) {
  validate(c);
  g.validate();
  if (split.train.empty()) throw ValidationError("train: empty training set");
  if (split.valid.empty()) throw ValidationError("train: empty validation set");
  const bool augment = c.model == Model::kSailor;
  if (augment && partition.tail_nodes.empty()) throw ValidationError("train: empty tail set");

  const std::size_t n = g.n_nodes();
  const auto n_classes = static_cast<std::size_t>(g.n_classes);
  ModelParams m = init_params(g, c);
  const auto gnn_params = m.gnn.all();
  const auto aug_params = m.aug.all();
  const SparseMatrix original_normalized = num::normalize_adjacency(g.adjacency);

  TrainResult result;
  SparseMatrix forged_normalized;
  auto forge = [&](std::uint64_t index) {
    const auto f = augmentor::forge_tails(g.adjacency, partition, c.delta_drop, c.seed, index);
    forged_normalized = num::normalize_adjacency(f.adjacency);
    result.forged_edges_dropped = f.dropped_edges.size();
    result.forge_shortfall = f.shortfall;
  };
  if (augment) forge(0);

  num::AdamOptions gnn_opt;
  gnn_opt.lr = c.lr_g;
  gnn_opt.weight_decay = c.weight_decay;
  num::AdamOptions aug_opt;
  aug_opt.lr = c.lr_a;

  EarlyStopping stopper(c.patience);
  for (std::size_t epoch = 1; epoch <= c.max_epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    EpochLog log;
    log.epoch = epoch;
    try {
      if (augment && c.reforge_each_epoch && epoch > 1) forge(epoch);
      const augmentor::AugmentorParams sampled_with = m.aug;
      const EpochGraph eg = epoch_graph(g, partition, c, m.aug, original_normalized, epoch);
      log.added_edge_count = eg.added_edges.size();

      num::zero_grads(gnn_params);
      num::zero_grads(aug_params);
      {
        num::Tape tape;
        auto dropout_rng = num::make_rng(c.seed, num::Stream::kDropout, epoch);
        const num::Var logits = gnn::gcn_forward(eg.normalized, tape.constant(g.features), m.gnn,
                                                 {true, c.dropout, &dropout_rng});
        const num::Var l_sup = gnn::loss_sup(logits, g.labels, split.train);
        log.l_sup = l_sup.value().item();
        tape.backward(num::scale(l_sup, c.alpha));
      }
      log.aug_grad_from_sup = max_abs_grad(aug_params);
      num::adam_step(gnn_params, gnn_opt);

      DenseMatrix eval_logits;
      if (augment) {
        num::zero_grads(gnn_params);
        num::zero_grads(aug_params);
        num::Tape tape;
        const num::Var x = tape.constant(g.features);
        // The classifier is on this tape only to prove no gradient reaches it.
        eval_logits = gnn::gcn_forward(eg.normalized, x, m.gnn).value();
        auto noise_rng = num::make_rng(c.seed, num::Stream::kNoise, epoch);
        const DenseMatrix noise_aug = num::standard_normal(n, n_classes, noise_rng);
        const DenseMatrix noise_ali = num::standard_normal(n, n_classes, noise_rng);
        const auto l_aug = augmentor::loss_aug(forged_normalized, g.adjacency, x, m.aug, noise_aug, c.batch);
        const auto l_p = augmentor::loss_p(original_normalized, x, m.aug, g.labels, split.train);
        const num::Var l_ali = augmentor::loss_ali(eg.normalized, x, m.aug, eval_logits, noise_ali);
        log.l_aug = l_aug.total.value().item();
        log.l_p = l_p.loss.value().item();
        log.l_ali = l_ali.value().item();
        const num::Var total = num::add(num::add(num::scale(l_aug.total, c.beta), num::scale(l_p.loss, c.eta)),
                                        num::scale(l_ali, c.delta));
        tape.backward(total);
        log.gnn_grad_from_aug = max_abs_grad(gnn_params);
        num::adam_step(aug_params, aug_opt);
      } else {
        eval_logits = gnn::gcn_logits(eg.normalized, g.features, m.gnn);
      }
      if (log.aug_grad_from_sup != 0.0 || log.gnn_grad_from_aug != 0.0)
        throw NumericError("gradient leaked between classifier and augmentor");
      for (double v : {log.l_sup, log.l_aug, log.l_p, log.l_ali})
        if (!std::isfinite(v)) throw NumericError("non-finite loss");

      log.valid_accuracy = gnn::accuracy(eval_logits, g.labels, split.valid);
      log.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (stopper.update(log.valid_accuracy)) {
        result.best.gnn = m.gnn;
        result.best.aug = sampled_with;
        result.best_epoch = epoch;
        result.best_valid_accuracy = log.valid_accuracy;
      }
      result.logs.push_back(log);
      if (on_epoch) on_epoch(log, eg);
    } catch (const NumericError& e) {
      throw NumericError("epoch " + std::to_string(epoch) + ": " + e.what());
    }
    if (stopper.should_stop()) break;
  }
  return result;
}

struct Metrics {
  graph::SplitMode mode = graph::SplitMode::kTailProtocol;
  std::size_t epoch = 0;
  double valid_accuracy = 0.0;
  double test_accuracy = 0.0;
  double test_weighted_f1 = 0.0;
  std::optional<double> head_accuracy;  // test nodes above the degree threshold
  std::optional<double> tail_accuracy;  // test nodes at or below it
  std::size_t added_edges = 0;
};

struct Evaluation {
  Metrics metrics;
  EpochGraph graph;
  DenseMatrix logits;
};

/// Re-derives the augmented graph of `epoch` from the stored augmentor and
/// scores the classifier on it in evaluation mode.
inline Evaluation evaluate(const AttributedGraph& g, const NodePartition& partition, const DatasetSplit& split,
                           const TrainConfig& c, ModelParams& m, std::size_t epoch) {
  if (split.test.empty()) throw ValidationError("evaluate: empty test set");
  if (m.gnn.layers.empty() || m.gnn.layers.front().value.rows() != g.n_features() ||
      m.gnn.n_classes() != static_cast<std::size_t>(g.n_classes))
    throw ValidationError("evaluate: classifier shape does not match the graph");
  if (c.model == Model::kSailor && m.aug.eps_raw.value.rows() != g.n_nodes())
    throw ValidationError("evaluate: augmentor node count does not match the graph");
  Evaluation ev;
  ev.graph = epoch_graph(g, partition, c, m.aug, num::normalize_adjacency(g.adjacency), epoch);
  ev.logits = gnn::gcn_logits(ev.graph.normalized, g.features, m.gnn);
  Metrics& r = ev.metrics;
  r.mode = split.mode;
  r.epoch = epoch;
  r.valid_accuracy = split.valid.empty() ? 0.0 : gnn::accuracy(ev.logits, g.labels, split.valid);
  r.test_accuracy = gnn::accuracy(ev.logits, g.labels, split.test);
  r.test_weighted_f1 = gnn::weighted_f1(ev.logits, g.labels, split.test);
  std::vector<std::size_t> head, tail;
  for (std::size_t v : split.test) (partition.is_tail(v) ? tail : head).push_back(v);
  if (!head.empty()) r.head_accuracy = gnn::accuracy(ev.logits, g.labels, head);
  if (!tail.empty()) r.tail_accuracy = gnn::accuracy(ev.logits, g.labels, tail);
  r.added_edges = ev.graph.added_edges.size();
  return ev;
}

inline nlohmann::ordered_json to_json(const Metrics& r) {
  nlohmann::ordered_json j;
  j["split"] = graph::to_string(r.mode);
  j["epoch"] = r.epoch;
  j["valid_accuracy"] = r.valid_accuracy;
  j["test_accuracy"] = r.test_accuracy;
  j["test_weighted_f1"] = r.test_weighted_f1;
  j["head_accuracy"] = r.head_accuracy ? nlohmann::ordered_json(*r.head_accuracy) : nlohmann::ordered_json();
  j["tail_accuracy"] = r.tail_accuracy ? nlohmann::ordered_json(*r.tail_accuracy) : nlohmann::ordered_json();
  j["added_edges"] = r.added_edges;
  return j;
}

inline nlohmann::ordered_json to_json(const EpochLog& l) {
  nlohmann::ordered_json j;
  j["epoch"] = l.epoch;
  j["l_sup"] = l.l_sup;
  j["l_aug"] = l.l_aug;
  j["l_p"] = l.l_p;
  j["l_ali"] = l.l_ali;
  j["added_edge_count"] = l.added_edge_count;
  j["valid_accuracy"] = l.valid_accuracy;
  j["aug_grad_from_sup"] = l.aug_grad_from_sup;
  j["gnn_grad_from_aug"] = l.gnn_grad_from_aug;
  j["wall_time"] = l.wall_time;
  return j;
}

inline constexpr int kSidecarVersion = 1;

/// Writes checkpoint.bin (parameters) and checkpoint.json (configuration,
/// epoch and shapes) into `dir`.
inline void save_model(const std::filesystem::path& dir, const ModelParams& m, const TrainConfig& c,
                       std::size_t epoch, const AttributedGraph& g) {
  std::vector<num::NamedMatrix> entries;
  for (const auto& p : m.gnn.layers) entries.push_back({p.name, p.value});
  for (const auto& p : m.aug.layers) entries.push_back({p.name, p.value});
  entries.push_back({m.aug.mu_head.name, m.aug.mu_head.value});
  entries.push_back({m.aug.logvar_head.name, m.aug.logvar_head.value});
  entries.push_back({m.aug.eps_raw.name, m.aug.eps_raw.value});
  std::filesystem::create_directories(dir);
  num::save_checkpoint(dir / "checkpoint.bin", entries);

  nlohmann::ordered_json side;
  side["format_version"] = kSidecarVersion;
  side["epoch"] = epoch;
  side["n_nodes"] = g.n_nodes();
  side["n_features"] = g.n_features();
  side["n_classes"] = g.n_classes;
  nlohmann::ordered_json cfg;
  for (const auto& [k, v] : to_pairs(c)) cfg[k] = v;
  side["config"] = cfg;
  nlohmann::ordered_json shapes = nlohmann::ordered_json::array();
  for (const auto& e : entries) shapes.push_back({{"name", e.name}, {"rows", e.value.rows()}, {"cols", e.value.cols()}});
  side["parameters"] = shapes;
  std::ofstream(dir / "checkpoint.json") << side.dump(2) << '\n';
}

struct LoadedModel {
  ModelParams params;
  TrainConfig config;
  std::size_t epoch = 0;
};

/// Reads a checkpoint written by save_model and checks it against `g`.
/// `checkpoint` is the .bin file; its sidecar is the sibling checkpoint.json.
inline LoadedModel load_model(const std::filesystem::path& checkpoint, const AttributedGraph& g) {
  const auto entries = num::load_checkpoint(checkpoint);
  const auto sidecar_path = checkpoint.parent_path() / "checkpoint.json";
  std::ifstream in(sidecar_path);
  if (!in) throw ValidationError("checkpoint: missing sidecar " + sidecar_path.string());
  nlohmann::json side;
  try {
    in >> side;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("checkpoint: unreadable sidecar " + sidecar_path.string() + ": " + e.what());
  }
  if (side.value("format_version", -1) != kSidecarVersion)
    throw ValidationError("checkpoint: unsupported sidecar version in " + sidecar_path.string());

  LoadedModel out;
  for (const auto& [k, v] : side.at("config").items()) set_value(out.config, k, v.get<std::string>());
  out.epoch = side.at("epoch").get<std::size_t>();
  if (side.at("n_nodes").get<std::size_t>() != g.n_nodes() ||
      side.at("n_features").get<std::size_t>() != g.n_features() || side.at("n_classes").get<int>() != g.n_classes)
    throw ValidationError("checkpoint: shape mismatch between checkpoint and graph");

  out.params = init_params(g, out.config);
  std::vector<num::Parameter*> slots = out.params.gnn.all();
  for (num::Parameter* p : out.params.aug.all()) slots.push_back(p);
  if (slots.size() != entries.size())
    throw ValidationError("checkpoint: expected " + std::to_string(slots.size()) + " tensors, found " +
                          std::to_string(entries.size()));
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (entries[i].name != slots[i]->name || entries[i].value.rows() != slots[i]->value.rows() ||
        entries[i].value.cols() != slots[i]->value.cols())
      throw ValidationError("checkpoint: shape mismatch for '" + entries[i].name + "'");
    *slots[i] = num::Parameter(slots[i]->name, entries[i].value);
  }
  return out;
}

}  // namespace sailor::trainer

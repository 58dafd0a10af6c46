#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sailor/sailor.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace sailor;
using namespace sailor::trainer;

#ifndef SAILOR_VERSION
#define SAILOR_VERSION "dev"
#endif

namespace {

struct Options {
  std::string bundle;
  std::string config;
  std::string out;
  std::string checkpoint;
  std::optional<std::uint64_t> seed;
  std::vector<std::uint64_t> seeds;
  std::string split;
  std::vector<std::string> ablations;
  std::vector<std::string> overrides;
  // sweep
  std::string param;
  std::string grid;
  // synth
  std::size_t nodes = 2000;
  int classes = 6;
  std::size_t features = 300;
  double avg_degree = 4.0;
  double homophily = 0.8;
  std::size_t per_class = 20;
  std::size_t n_valid = 500;
  std::size_t n_test = 1000;
  bool public_masks = false;
  std::size_t jobs = 1;
};

Dataset load_dataset(const std::string& bundle) {
  graph::LoadStats stats;
  auto raw = graph::load_graph(bundle, &stats);
  const std::size_t before = raw.n_nodes();
  auto g = graph::preprocess(raw);
  if (stats.self_loops_dropped || stats.duplicate_edges || g.n_nodes() != before)
    std::cerr << "bundle: dropped " << stats.self_loops_dropped << " self-loops, merged " << stats.duplicate_edges
              << " duplicate edges, kept " << g.n_nodes() << " of " << before << " nodes (largest component)\n";
  return make_dataset(std::move(g), graph::load_masks(bundle));
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json config_json(const TrainConfig& c) {
  json j = json::object();
  for (const auto& [k, v] : to_pairs(c)) j[k] = v;
  return j;
}

// Written before any computation; holds everything needed to replay the run.
void write_manifest(const fs::path& out, const std::string& command, const Options& o,
                    const std::optional<TrainConfig>& config, const std::vector<std::uint64_t>& seeds,
                    json extra = json::object()) {
  fs::create_directories(out);
  json m;
  m["command"] = command;
  m["tool_version"] = SAILOR_VERSION;
  m["bundle"] = o.bundle;
  m["out"] = o.out;
  if (config) m["config"] = config_json(*config);
  m["seeds"] = seeds;
  for (auto& [k, v] : extra.items()) m[k] = v;
  write_json(out / "manifest.json", m);
}

TrainConfig resolve_config(const Options& o) {
  TrainConfig c = load_config(o.config);
  if (!o.split.empty()) set_value(c, "split", o.split);
  for (const auto& a : o.ablations) apply_ablation(c, a);
  for (const auto& s : o.overrides) apply_override(c, s);
  if (o.seed) c.seed = *o.seed;
  validate(c);
  return c;
}

std::vector<std::uint64_t> resolve_seeds(const Options& o, const TrainConfig& c) {
  if (!o.seeds.empty()) return o.seeds;
  return {c.seed};
}

const char* membership(const DatasetSplit& s, graph::NodeId v) {
  if (std::binary_search(s.train.begin(), s.train.end(), v)) return "train";
  if (std::binary_search(s.valid.begin(), s.valid.end(), v)) return "valid";
  if (std::binary_search(s.test.begin(), s.test.end(), v)) return "test";
  return "none";
}

void write_added_edges(const fs::path& path, const Dataset& d, const std::vector<graph::Edge>& edges,
                       std::size_t epoch) {
  TsvWriter tsv(path, {"u", "v", "epoch"});
  for (const auto& e : edges)
    tsv.row({static_cast<long long>(d.graph.original_ids[e.u]), static_cast<long long>(d.graph.original_ids[e.v]),
             epoch});
}

void write_predictions(const fs::path& path, const Dataset& d, const DatasetSplit& split, const DenseMatrix& logits) {
  TsvWriter tsv(path, {"node", "label", "predicted", "set", "group"});
  for (graph::NodeId v = 0; v < d.graph.n_nodes(); ++v) {
    const auto row = logits.row(v);
    const auto pred = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
    tsv.row({static_cast<long long>(d.graph.original_ids[v]), static_cast<long long>(d.graph.labels[v]), pred,
             std::string(membership(split, v)), std::string(d.partition.is_tail(v) ? "tail" : "head")});
  }
}

std::string metrics_line(const Metrics& m) {
  std::string s = "test_accuracy=" + format_cell(m.test_accuracy) + " weighted_f1=" + format_cell(m.test_weighted_f1);
  if (m.head_accuracy) s += " head=" + format_cell(*m.head_accuracy);
  if (m.tail_accuracy) s += " tail=" + format_cell(*m.tail_accuracy);
  return s + " epoch=" + std::to_string(m.epoch) + " added_edges=" + std::to_string(m.added_edges);
}

struct RunReport {
  json metrics;
  std::string text;
};

// Evaluation artifacts shared by train and eval.
RunReport write_evaluation(const fs::path& out, const Dataset& d, const TrainConfig& c, ModelParams& params,
                           std::size_t epoch) {
  const DatasetSplit split = d.split_for(c);
  const Evaluation ev = evaluate(d.graph, d.partition, split, c, params, epoch);
  json metrics = to_json(ev.metrics);
  metrics["model"] = get_value(c, "model");
  metrics["seed"] = c.seed;
  write_json(out / "metrics.json", metrics);
  write_added_edges(out / "added_edges.tsv", d, ev.graph.added_edges, epoch);
  write_predictions(out / "predictions.tsv", d, split, ev.logits);
  return {metrics, metrics_line(ev.metrics)};
}

RunReport train_one(const fs::path& out, const Dataset& d, const TrainConfig& c) {
  fs::create_directories(out);
  std::ofstream log(out / "epochs.jsonl");
  auto on_epoch = [&log](const EpochLog& l, const EpochGraph&) { log << to_json(l).dump() << '\n'; };
  const TrainResult r = train(d.graph, d.partition, d.split_for(c), c, on_epoch);
  log.close();
  save_model(out, r.best, c, r.best_epoch, d.graph);
  ModelParams best = r.best;
  RunReport rep = write_evaluation(out, d, c, best, r.best_epoch);
  rep.text = "seed " + std::to_string(c.seed) + ": " + std::to_string(r.logs.size()) + " epochs, best valid_accuracy=" +
             format_cell(r.best_valid_accuracy) + "\n  " + rep.text;
  return rep;
}

// Seeds run on up to `jobs` threads; each run is single-threaded and only
// reads the shared dataset.
std::vector<RunReport> train_seeds(const fs::path& out, const Dataset& d, const TrainConfig& base,
                                   const std::vector<std::uint64_t>& seeds, std::size_t jobs) {
  std::vector<RunReport> reports(seeds.size());
  std::vector<std::exception_ptr> errors(seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < seeds.size();) {
      try {
        TrainConfig c = base;
        c.seed = seeds[i];
        reports[i] = train_one(out / ("seed_" + std::to_string(seeds[i])), d, c);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::min(jobs, seeds.size()); ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return reports;
}

int cmd_train(const Options& o) {
  const TrainConfig base = resolve_config(o);
  const auto seeds = resolve_seeds(o, base);
  if (o.jobs < 1) throw ValidationError("--jobs must be >= 1");
  write_manifest(o.out, "train", o, base, seeds,
                 {{"ablations", o.ablations}, {"overrides", o.overrides}});
  const Dataset d = load_dataset(o.bundle);
  if (seeds.size() == 1) {
    TrainConfig c = base;
    c.seed = seeds.front();
    std::printf("%s\n", train_one(o.out, d, c).text.c_str());
    return 0;
  }
  const auto reports = train_seeds(fs::path(o.out), d, base, seeds, o.jobs);
  json per_seed = json::array();
  std::vector<double> acc, f1, tail;
  for (const auto& r : reports) {
    std::printf("%s\n", r.text.c_str());
    const json& m = r.metrics;
    acc.push_back(m["test_accuracy"].get<double>());
    f1.push_back(m["test_weighted_f1"].get<double>());
    if (m["tail_accuracy"].is_number()) tail.push_back(m["tail_accuracy"].get<double>());
    per_seed.push_back(m);
  }
  auto stat = [](const std::vector<double>& xs) {
    if (xs.empty()) return json();
    const MeanStd ms = mean_std(xs);
    return json{{"mean", ms.mean}, {"std", ms.std}};
  };
  json summary;
  summary["seeds"] = seeds;
  summary["test_accuracy"] = stat(acc);
  summary["test_weighted_f1"] = stat(f1);
  summary["tail_accuracy"] = stat(tail);
  summary["runs"] = per_seed;
  write_json(fs::path(o.out) / "summary.json", summary);
  const MeanStd ms = mean_std(acc);
  std::printf("mean test_accuracy over %zu seeds: %s +- %s\n", seeds.size(), format_cell(ms.mean).c_str(),
              format_cell(ms.std).c_str());
  return 0;
}

fs::path checkpoint_file(const std::string& arg) {
  const fs::path p(arg);
  return fs::is_directory(p) ? p / "checkpoint.bin" : p;
}

int cmd_eval(const Options& o) {
  write_manifest(o.out, "eval", o, std::nullopt, {}, {{"checkpoint", o.checkpoint}, {"split", o.split}});
  const Dataset d = load_dataset(o.bundle);
  LoadedModel m = load_model(checkpoint_file(o.checkpoint), d.graph);
  if (!o.split.empty()) set_value(m.config, "split", o.split);
  std::printf("%s\n", write_evaluation(o.out, d, m.config, m.params, m.epoch).text.c_str());
  return 0;
}

int cmd_augment_report(const Options& o) {
  write_manifest(o.out, "augment-report", o, std::nullopt, {}, {{"checkpoint", o.checkpoint}});
  const Dataset d = load_dataset(o.bundle);
  LoadedModel m = load_model(checkpoint_file(o.checkpoint), d.graph);
  const EpochGraph eg = epoch_graph(d.graph, d.partition, m.config, m.params.aug,
                                    num::normalize_adjacency(d.graph.adjacency), m.epoch);
  write_added_edges(fs::path(o.out) / "added_edges.tsv", d, eg.added_edges, m.epoch);
  graph::write_edges(fs::path(o.out) / "augmented_edges.tsv", eg.adjacency);

  const auto before = graph::heterophily_report(d.graph.adjacency, d.graph.labels, d.partition);
  const auto after = graph::heterophily_report(eg.adjacency, d.graph.labels, d.partition);
  {
    TsvWriter tsv(fs::path(o.out) / "total_heterophily.tsv",
                  {"group", "nodes", "original_count", "augmented_count", "original_percent", "augmented_percent"});
    auto row = [&tsv](const char* name, const graph::GroupStats& a, const graph::GroupStats& b) {
      tsv.row({std::string(name), a.size, a.total_het_count, b.total_het_count, 100.0 * a.total_het_prop,
               100.0 * b.total_het_prop});
    };
    row("head", before.head, after.head);
    row("tail", before.tail, after.tail);
    row("all", before.all, after.all);
  }
  const auto grid = linear_grid(0.0, 1.0, 101);
  TsvWriter tsv(fs::path(o.out) / "homophily_cdf_compare.tsv", {"group", "homophily", "original", "augmented"});
  json groups = json::object();
  for (const auto& [name, a, b] : {std::tuple{"head", &before.head, &after.head},
                                   std::tuple{"tail", &before.tail, &after.tail},
                                   std::tuple{"all", &before.all, &after.all}}) {
    const auto cmp = compare_cdfs(a->homophily_cdf, b->homophily_cdf, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) tsv.row({std::string(name), grid[i], cmp.original[i], cmp.augmented[i]});
    const auto low = compare_cdfs(a->homophily_cdf, b->homophily_cdf, linear_grid(0.0, 0.5, 51));
    groups[name] = {{"original_total_het", a->total_het_count},
                    {"augmented_total_het", b->total_het_count},
                    {"cdf_not_above_fraction_0_to_0.5", low.fraction_not_above()}};
  }
  json summary;
  summary["epoch"] = m.epoch;
  summary["added_edges"] = eg.added_edges.size();
  summary["groups"] = groups;
  write_json(fs::path(o.out) / "augment_summary.json", summary);
  std::printf("added %zu edges; total-heterophilic nodes %zu -> %zu\n", eg.added_edges.size(),
              before.all.total_het_count, after.all.total_het_count);
  return 0;
}

int cmd_analyze(const Options& o) {
  write_manifest(o.out, "analyze", o, std::nullopt, {});
  const Dataset d = load_dataset(o.bundle);
  const fs::path out(o.out);
  const auto deg = graph::degrees(d.graph);
  {
    std::map<std::size_t, std::size_t> hist;
    for (std::size_t k : deg) ++hist[k];
    TsvWriter tsv(out / "degree_histogram.tsv", {"degree", "count", "group"});
    for (const auto& [k, count] : hist)
      tsv.row({k, count, std::string(k <= d.partition.degree_threshold ? "tail" : "head")});
  }
  // E counts nonzeros of the symmetric adjacency, i.e. both directions of each edge.
  const std::size_t nnz = d.graph.adjacency.nnz();
  {
    TsvWriter tsv(out / "summary.tsv", {"N", "E", "F", "C", "DegTh"});
    tsv.row({d.graph.n_nodes(), nnz, d.graph.n_features(), static_cast<long long>(d.graph.n_classes),
             d.partition.degree_threshold});
  }
  const auto rep = graph::heterophily_report(d.graph, d.partition);
  {
    TsvWriter tsv(out / "heterophily.tsv", {"group", "nodes", "total_het_count", "total_het_percent"});
    tsv.row({std::string("head"), rep.head.size, rep.head.total_het_count, 100.0 * rep.head.total_het_prop});
    tsv.row({std::string("tail"), rep.tail.size, rep.tail.total_het_count, 100.0 * rep.tail.total_het_prop});
  }
  {
    TsvWriter tsv(out / "homophily_cdf.tsv", {"group", "homophily", "cdf"});
    for (const auto& [name, s] : {std::pair{"head", &rep.head}, std::pair{"tail", &rep.tail}})
      for (const auto& [x, y] : s->homophily_cdf.points) tsv.row({std::string(name), x, y});
  }
  std::printf("N=%zu E=%zu F=%zu C=%d DegTh=%zu\n", d.graph.n_nodes(), nnz, d.graph.n_features(), d.graph.n_classes,
              d.partition.degree_threshold);
  std::printf("total-heterophilic head=%zu (%s%%) tail=%zu (%s%%)\n", rep.head.total_het_count,
              format_cell(100.0 * rep.head.total_het_prop).c_str(), rep.tail.total_het_count,
              format_cell(100.0 * rep.tail.total_het_prop).c_str());
  return 0;
}

// "log:lo:hi:n", "linear:lo:hi:n" or "values:a,b,c".
std::vector<double> parse_grid(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw ValidationError("sweep: grid must look like log:lo:hi:n or values:a,b");
  const std::string kind = spec.substr(0, colon);
  std::vector<std::string> parts;
  std::stringstream ss(spec.substr(colon + 1));
  for (std::string p; std::getline(ss, p, kind == "values" ? ',' : ':');) parts.push_back(p);
  std::vector<double> nums;
  for (const auto& p : parts) nums.push_back(detail::parse_real("grid", detail::trim(p)));
  if (kind == "values") {
    if (nums.empty()) throw ValidationError("sweep: empty grid");
    return nums;
  }
  if (nums.size() != 3 || nums[2] < 1 || nums[2] != std::floor(nums[2]))
    throw ValidationError("sweep: grid '" + spec + "' needs lo:hi:n with integer n >= 1");
  const auto n = static_cast<std::size_t>(nums[2]);
  if (kind == "log") return log_grid(nums[0], nums[1], n);
  if (kind == "linear") return linear_grid(nums[0], nums[1], n);
  throw ValidationError("sweep: unknown grid kind '" + kind + "'");
}

int cmd_sweep(const Options& o) {
  const TrainConfig base = resolve_config(o);
  const auto seeds = resolve_seeds(o, base);
  const auto grid = parse_grid(o.grid);
  find_key(o.param);
  write_manifest(o.out, "sweep", o, base, seeds,
                 {{"param", o.param}, {"grid", grid}, {"ablations", o.ablations}, {"overrides", o.overrides}});
  const Dataset d = load_dataset(o.bundle);
  const auto rows = run_sweep(d, base, o.param, grid, seeds);
  TsvWriter tsv(fs::path(o.out) / "sweep.tsv",
                {"param", "value", "seeds", "test_accuracy_mean", "test_accuracy_std", "test_weighted_f1_mean",
                 "test_weighted_f1_std", "valid_accuracy_mean", "valid_accuracy_std"});
  for (const auto& r : rows) {
    tsv.row({o.param, r.value, r.n_seeds, r.test_accuracy.mean, r.test_accuracy.std, r.test_weighted_f1.mean,
             r.test_weighted_f1.std, r.valid_accuracy.mean, r.valid_accuracy.std});
    std::printf("%s=%s test_accuracy=%s +- %s\n", o.param.c_str(), format_cell(r.value).c_str(),
                format_cell(r.test_accuracy.mean).c_str(), format_cell(r.test_accuracy.std).c_str());
  }
  return 0;
}

int cmd_synth(const Options& o) {
  graph::SyntheticSpec spec;
  spec.n_nodes = o.nodes;
  spec.n_classes = o.classes;
  spec.n_features = o.features;
  spec.avg_degree = o.avg_degree;
  spec.edge_homophily = o.homophily;
  spec.seed = o.seed.value_or(0);
  const auto g = graph::make_synthetic_graph(spec);
  if (o.public_masks) {
    const auto masks = graph::make_public_masks(g, o.per_class, o.n_valid, o.n_test, spec.seed);
    graph::write_bundle(o.out, g, &masks);
  } else {
    graph::write_bundle(o.out, g);
  }
  std::printf("wrote %zu nodes, %zu edges to %s\n", g.n_nodes(), graph::edge_count(g), o.out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tail-structure augmentation and GCN node classification"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SAILOR_VERSION);
  Options o;

  auto bundle = [&o](CLI::App* sub) {
    sub->add_option("--bundle", o.bundle, "Graph bundle directory")->required()->check(CLI::ExistingDirectory);
  };
  auto out = [&o](CLI::App* sub) { sub->add_option("--out", o.out, "Output directory")->required(); };
  auto training = [&o](CLI::App* sub) {
    sub->add_option("--config", o.config, "key = value configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "Run seed (overrides the config)");
    sub->add_option("--seeds", o.seeds, "Several seeds, one run each")->delimiter(',');
    sub->add_option("--split", o.split, "Split protocol")->check(CLI::IsMember({"tail", "public"}));
    sub->add_option("--ablation", o.ablations, "Zero one augmentor loss weight")
        ->check(CLI::IsMember({"no-aug-loss", "no-aug", "no-prop", "no-align"}));
    sub->add_option("--set", o.overrides, "Override one config key (key=value)");
  };

  auto* analyze = app.add_subcommand("analyze", "Degree, partition and homophily statistics");
  bundle(analyze);
  out(analyze);

  auto* train = app.add_subcommand("train", "Train and evaluate on the test split");
  bundle(train);
  out(train);
  training(train);
  train->add_option("--jobs", o.jobs, "Seeds trained concurrently")->capture_default_str();

  auto* eval = app.add_subcommand("eval", "Evaluate a saved checkpoint");
  bundle(eval);
  out(eval);
  eval->add_option("--checkpoint", o.checkpoint, "checkpoint.bin or the directory holding it")->required();
  eval->add_option("--split", o.split, "Split protocol")->check(CLI::IsMember({"tail", "public"}));

  auto* report = app.add_subcommand("augment-report", "Compare original and augmented homophily");
  bundle(report);
  out(report);
  report->add_option("--checkpoint", o.checkpoint, "checkpoint.bin or the directory holding it")->required();

  auto* sweep = app.add_subcommand("sweep", "One-dimensional hyperparameter sweep");
  bundle(sweep);
  out(sweep);
  training(sweep);
  sweep->add_option("--param", o.param, "Config key to vary")->required();
  sweep->add_option("--grid", o.grid, "log:lo:hi:n, linear:lo:hi:n or values:a,b,...")->required();

  auto* synth = app.add_subcommand("synth", "Write a synthetic long-tailed graph bundle");
  out(synth);
  synth->add_option("--seed", o.seed, "Generator seed");
  synth->add_option("--nodes", o.nodes, "Node count")->capture_default_str();
  synth->add_option("--classes", o.classes, "Class count")->capture_default_str();
  synth->add_option("--features", o.features, "Feature count")->capture_default_str();
  synth->add_option("--avg-degree", o.avg_degree, "Target mean degree")->capture_default_str();
  synth->add_option("--homophily", o.homophily, "Chance an edge stays in its class")->capture_default_str();
  synth->add_flag("--public-masks", o.public_masks, "Also write masks.tsv");
  synth->add_option("--per-class", o.per_class, "Training nodes per class in masks.tsv")->capture_default_str();
  synth->add_option("--valid", o.n_valid, "Validation nodes in masks.tsv")->capture_default_str();
  synth->add_option("--test", o.n_test, "Test nodes in masks.tsv")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (analyze->parsed()) return cmd_analyze(o);
    if (train->parsed()) return cmd_train(o);
    if (eval->parsed()) return cmd_eval(o);
    if (report->parsed()) return cmd_augment_report(o);
    if (sweep->parsed()) return cmd_sweep(o);
    if (synth->parsed()) return cmd_synth(o);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

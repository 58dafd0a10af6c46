#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "sailor/augmentor/encoder.hpp"
#include "sailor/error.hpp"
#include "sailor/graph/partition.hpp"

namespace sailor::trainer {

enum class Model { kSailor, kGcn };

/// Every knob of a training run. Defaults match configs/default.cfg.
struct TrainConfig {
  Model model = Model::kSailor;
  graph::SplitMode split = graph::SplitMode::kTailProtocol;

  // loss weights
  double alpha = 1.0;
  double beta = 0.1;
  double eta = 0.1;
  double delta = 0.1;

  double delta_drop = 0.5;  // fraction of head-node edges dropped when forging
  bool reforge_each_epoch = false;
  std::size_t batch = 512;
  std::size_t sample_rounds = 1;

  double lr_g = 0.01;
  double lr_a = 0.01;
  double weight_decay = 5e-4;  // classifier only
  std::size_t max_epochs = 1000;
  std::size_t patience = 100;

  std::size_t gnn_hidden = 64;
  std::size_t gnn_layers = 2;
  double dropout = 0.5;
  std::size_t enc_hidden = 32;
  std::size_t enc_layers = 2;
  augmentor::Activation activation = augmentor::Activation::kRelu;

  std::uint64_t seed = 0;
};

inline void validate(const TrainConfig& c) {
  auto fail = [](const std::string& msg) { throw ValidationError("config: " + msg); };
  if (c.alpha < 0 || c.beta < 0 || c.eta < 0 || c.delta < 0) fail("loss weights must be >= 0");
  if (!(c.delta_drop >= 0.0 && c.delta_drop < 1.0)) fail("delta_drop must lie in [0, 1)");
  if (c.batch < 1) fail("batch must be >= 1");
  if (c.sample_rounds < 1) fail("sample_rounds must be >= 1");
  if (!(c.lr_g > 0) || !(c.lr_a > 0)) fail("learning rates must be > 0");
  if (c.weight_decay < 0) fail("weight_decay must be >= 0");
  if (c.max_epochs < 1) fail("max_epochs must be >= 1");
  if (c.patience > c.max_epochs) fail("patience must not exceed max_epochs");
  if (!(c.dropout >= 0.0 && c.dropout < 1.0)) fail("dropout must lie in [0, 1)");
  if (c.gnn_layers < 1 || c.enc_layers < 1) fail("layer counts must be >= 1");
  if (c.gnn_hidden < 1 || c.enc_hidden < 1) fail("hidden widths must be >= 1");
}

namespace detail {

inline std::string format_real(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

inline double parse_real(std::string_view key, std::string_view s) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw ValidationError("config: key '" + std::string(key) + "' expects a number, got '" + std::string(s) + "'");
  return v;
}

inline std::uint64_t parse_count(std::string_view key, std::string_view s) {
  std::uint64_t v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw ValidationError("config: key '" + std::string(key) + "' expects a non-negative integer, got '" +
                          std::string(s) + "'");
  return v;
}

inline bool parse_flag(std::string_view key, std::string_view s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ValidationError("config: key '" + std::string(key) + "' expects true or false, got '" + std::string(s) + "'");
}

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

struct ConfigKey {
  const char* name;
  std::function<std::string(const TrainConfig&)> get;
  std::function<void(TrainConfig&, std::string_view)> set;
};

inline const std::vector<ConfigKey>& config_keys() {
  using detail::format_real;
  using detail::parse_count;
  using detail::parse_real;
#define SAILOR_REAL_KEY(field)                                                              \
  ConfigKey {                                                                               \
    #field, [](const TrainConfig& c) { return format_real(c.field); },                      \
        [](TrainConfig& c, std::string_view s) { c.field = parse_real(#field, s); }         \
  }
#define SAILOR_COUNT_KEY(field)                                                                          \
  ConfigKey {                                                                                            \
    #field, [](const TrainConfig& c) { return std::to_string(c.field); },                                \
        [](TrainConfig& c, std::string_view s) { c.field = static_cast<decltype(c.field)>(parse_count(#field, s)); } \
  }
  static const std::vector<ConfigKey> keys = {
      ConfigKey{"model", [](const TrainConfig& c) { return std::string(c.model == Model::kGcn ? "gcn" : "sailor"); },
                [](TrainConfig& c, std::string_view s) {
                  if (s == "sailor") c.model = Model::kSailor;
                  else if (s == "gcn") c.model = Model::kGcn;
                  else throw ValidationError("config: model must be 'sailor' or 'gcn', got '" + std::string(s) + "'");
                }},
      ConfigKey{"split", [](const TrainConfig& c) { return std::string(graph::to_string(c.split)); },
                [](TrainConfig& c, std::string_view s) {
                  if (s == "tail") c.split = graph::SplitMode::kTailProtocol;
                  else if (s == "public") c.split = graph::SplitMode::kPublic;
                  else throw ValidationError("config: split must be 'tail' or 'public', got '" + std::string(s) + "'");
                }},
      SAILOR_REAL_KEY(alpha),
      SAILOR_REAL_KEY(beta),
      SAILOR_REAL_KEY(eta),
      SAILOR_REAL_KEY(delta),
      SAILOR_REAL_KEY(delta_drop),
      ConfigKey{"reforge_each_epoch", [](const TrainConfig& c) { return std::string(c.reforge_each_epoch ? "true" : "false"); },
                [](TrainConfig& c, std::string_view s) { c.reforge_each_epoch = detail::parse_flag("reforge_each_epoch", s); }},
      SAILOR_COUNT_KEY(batch),
      SAILOR_COUNT_KEY(sample_rounds),
      SAILOR_REAL_KEY(lr_g),
      SAILOR_REAL_KEY(lr_a),
      SAILOR_REAL_KEY(weight_decay),
      SAILOR_COUNT_KEY(max_epochs),
      SAILOR_COUNT_KEY(patience),
      SAILOR_COUNT_KEY(gnn_hidden),
      SAILOR_COUNT_KEY(gnn_layers),
      SAILOR_REAL_KEY(dropout),
      SAILOR_COUNT_KEY(enc_hidden),
      SAILOR_COUNT_KEY(enc_layers),
      ConfigKey{"activation",
                [](const TrainConfig& c) {
                  return std::string(c.activation == augmentor::Activation::kTanh ? "tanh" : "relu");
                },
                [](TrainConfig& c, std::string_view s) {
                  if (s == "relu") c.activation = augmentor::Activation::kRelu;
                  else if (s == "tanh") c.activation = augmentor::Activation::kTanh;
                  else throw ValidationError("config: activation must be 'relu' or 'tanh', got '" + std::string(s) + "'");
                }},
      SAILOR_COUNT_KEY(seed),
  };
#undef SAILOR_REAL_KEY
#undef SAILOR_COUNT_KEY
  return keys;
}

inline const ConfigKey& find_key(std::string_view name) {
  for (const auto& k : config_keys())
    if (name == k.name) return k;
  throw ValidationError("config: unknown key '" + std::string(name) + "'");
}

inline void set_value(TrainConfig& c, std::string_view key, std::string_view value) {
  find_key(key).set(c, detail::trim(value));
}

inline std::string get_value(const TrainConfig& c, std::string_view key) { return find_key(key).get(c); }

/// Applies one "key=value" override.
inline void apply_override(TrainConfig& c, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos)
    throw ValidationError("config: override '" + std::string(assignment) + "' is not key=value");
  set_value(c, detail::trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

/// Parses a key=value document ('#' starts a comment). Every known key must
/// appear exactly once; the seed may be omitted when it comes from elsewhere.
inline TrainConfig parse_config(std::string_view text, const std::string& origin = "config") {
  TrainConfig c;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ValidationError(origin + ":" + std::to_string(line_no) + ": expected key = value");
    const std::string key(detail::trim(line.substr(0, eq)));
    if (!seen.insert(key).second)
      throw ValidationError(origin + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
    try {
      set_value(c, key, line.substr(eq + 1));
    } catch (const ValidationError& e) {
      throw ValidationError(origin + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  for (const auto& k : config_keys()) {
    if (std::string_view(k.name) == "seed") continue;
    if (!seen.count(k.name)) throw ValidationError(origin + ": missing config key '" + std::string(k.name) + "'");
  }
  return c;
}

inline TrainConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

/// Ordered (key, value) pairs; feeding them back through parse_config
/// reproduces the same configuration.
inline std::vector<std::pair<std::string, std::string>> to_pairs(const TrainConfig& c) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& k : config_keys()) out.emplace_back(k.name, k.get(c));
  return out;
}

inline std::string to_text(const TrainConfig& c) {
  std::string s;
  for (const auto& [k, v] : to_pairs(c)) s += k + " = " + v + "\n";
  return s;
}

/// Ablations switch off one augmentor constraint by zeroing its weight.
inline void apply_ablation(TrainConfig& c, std::string_view name) {
  if (name == "no-aug-loss" || name == "no-aug") c.beta = 0.0;
  else if (name == "no-prop") c.eta = 0.0;
  else if (name == "no-align") c.delta = 0.0;
  else throw ValidationError("unknown ablation '" + std::string(name) + "' (expected no-aug-loss, no-prop or no-align)");
}

}  // namespace sailor::trainer

#pragma once

// Bundle directory format (all ids 0-based, tab separated, no header rows):
//   edges.tsv     u  v
//   features.tsv  id  f0 f1 ...        or   id  idx:val idx:val ...
//   labels.tsv    id  class
//   masks.tsv     id  train|valid|test   (optional)
//   meta.tsv      key value              (optional: n_nodes, n_features, n_classes)

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sailor/error.hpp"
#include "sailor/graph/graph.hpp"

namespace sailor::graph {

namespace fs = std::filesystem;

enum class SplitTag { kTrain, kValid, kTest };

struct LoadStats {
  std::size_t self_loops_dropped = 0;
  std::size_t duplicate_edges = 0;
};

namespace detail {

inline std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= line.size()) {
    const std::size_t pos = line.find('\t', start);
    const std::size_t stop = pos == std::string_view::npos ? line.size() : pos;
    if (stop > start) out.push_back(line.substr(start, stop - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string where(const fs::path& file, std::size_t line_no) {
  return file.filename().string() + ":" + std::to_string(line_no);
}

inline std::int64_t parse_int(std::string_view tok, const fs::path& file, std::size_t line_no) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ValidationError(where(file, line_no) + ": expected integer, got '" + std::string(tok) + "'");
  }
  return v;
}

inline double parse_real(std::string_view tok, const fs::path& file, std::size_t line_no) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ValidationError(where(file, line_no) + ": expected number, got '" + std::string(tok) + "'");
  }
  return v;
}

// Calls fn(fields, line_no) for each non-empty, non-comment line.
template <typename Fn>
void for_each_row(const fs::path& file, Fn&& fn) {
  std::ifstream in(file);
  if (!in) throw ValidationError("bundle: missing file " + file.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    fn(split_tabs(line), line_no);
  }
}

inline std::size_t checked_node(std::int64_t id, std::size_t n, const fs::path& file, std::size_t line_no) {
  if (id < 0 || static_cast<std::uint64_t>(id) >= n) {
    throw ValidationError(where(file, line_no) + ": node id " + std::to_string(id) +
                          " outside [0, " + std::to_string(n) + ")");
  }
  return static_cast<std::size_t>(id);
}

}  // namespace detail

inline std::map<std::string, std::int64_t> load_meta(const fs::path& bundle) {
  std::map<std::string, std::int64_t> meta;
  const fs::path file = bundle / "meta.tsv";
  if (!fs::exists(file)) return meta;
  detail::for_each_row(file, [&](const auto& f, std::size_t line_no) {
    if (f.size() != 2) throw ValidationError(detail::where(file, line_no) + ": expected key<TAB>value");
    meta[std::string(f[0])] = detail::parse_int(f[1], file, line_no);
  });
  return meta;
}

/// Reads a bundle into a symmetric graph. Duplicate edges are merged and
/// self-loops dropped; both are counted in `stats`.
inline AttributedGraph load_graph(const fs::path& bundle, LoadStats* stats = nullptr) {
  if (!fs::is_directory(bundle)) throw ValidationError("bundle: not a directory: " + bundle.string());
  const auto meta = load_meta(bundle);
  auto meta_value = [&meta](const char* key) -> std::optional<std::int64_t> {
    const auto it = meta.find(key);
    if (it == meta.end()) return std::nullopt;
    if (it->second < 0) throw ValidationError(std::string("meta.tsv: negative ") + key);
    return it->second;
  };

  // Labels fix the node count when meta.tsv does not.
  const fs::path label_file = bundle / "labels.tsv";
  std::vector<std::pair<std::int64_t, std::int64_t>> raw_labels;
  std::int64_t max_id = -1;
  detail::for_each_row(label_file, [&](const auto& f, std::size_t line_no) {
    if (f.size() != 2) throw ValidationError(detail::where(label_file, line_no) + ": expected id<TAB>class");
    const auto id = detail::parse_int(f[0], label_file, line_no);
    const auto cls = detail::parse_int(f[1], label_file, line_no);
    raw_labels.emplace_back(id, cls);
    max_id = std::max(max_id, id);
  });
  const std::size_t n = static_cast<std::size_t>(meta_value("n_nodes").value_or(max_id + 1));

  std::int64_t max_class = -1;
  std::vector<int> labels(n, -1);
  for (std::size_t k = 0; k < raw_labels.size(); ++k) {
    const auto [id, cls] = raw_labels[k];
    const std::size_t v = detail::checked_node(id, n, label_file, k + 1);
    if (cls < 0) throw ValidationError("labels.tsv: negative class id for node " + std::to_string(id));
    if (labels[v] != -1 && labels[v] != cls)
      throw ValidationError("labels.tsv: conflicting labels for node " + std::to_string(id));
    labels[v] = static_cast<int>(cls);
    max_class = std::max(max_class, cls);
  }
  for (std::size_t v = 0; v < n; ++v)
    if (labels[v] == -1) throw ValidationError("labels.tsv: node " + std::to_string(v) + " has no label");
  const int n_classes = static_cast<int>(meta_value("n_classes").value_or(max_class + 1));
  for (std::size_t v = 0; v < n; ++v) {
    if (labels[v] >= n_classes) {
      throw ValidationError("labels.tsv: label " + std::to_string(labels[v]) + " of node " +
                            std::to_string(v) + " out of range for " + std::to_string(n_classes) +
                            " classes");
    }
  }

  // Features: dense rows must agree on width; sparse rows give idx:val pairs.
  const fs::path feature_file = bundle / "features.tsv";
  struct FeatureRow {
    std::size_t node;
    std::vector<std::pair<std::size_t, double>> entries;
  };
  std::vector<FeatureRow> rows;
  std::optional<std::size_t> width =
      meta_value("n_features") ? std::optional<std::size_t>(static_cast<std::size_t>(*meta_value("n_features")))
                               : std::nullopt;
  std::optional<std::size_t> dense_width;
  std::size_t max_index = 0;
  detail::for_each_row(feature_file, [&](const auto& f, std::size_t line_no) {
    FeatureRow row{detail::checked_node(detail::parse_int(f[0], feature_file, line_no), n, feature_file, line_no), {}};
    const bool sparse = f.size() > 1 && f[1].find(':') != std::string_view::npos;
    if (sparse) {
      for (std::size_t k = 1; k < f.size(); ++k) {
        const auto colon = f[k].find(':');
        if (colon == std::string_view::npos)
          throw ValidationError(detail::where(feature_file, line_no) + ": mixed dense and idx:val entries");
        const auto idx = detail::parse_int(f[k].substr(0, colon), feature_file, line_no);
        if (idx < 0) throw ValidationError(detail::where(feature_file, line_no) + ": negative feature index");
        row.entries.emplace_back(static_cast<std::size_t>(idx),
                                 detail::parse_real(f[k].substr(colon + 1), feature_file, line_no));
        max_index = std::max(max_index, static_cast<std::size_t>(idx) + 1);
      }
    } else {
      const std::size_t w = f.size() - 1;
      if (dense_width && *dense_width != w) {
        throw ValidationError(detail::where(feature_file, line_no) + ": ragged feature row (" +
                              std::to_string(w) + " values, expected " + std::to_string(*dense_width) + ")");
      }
      dense_width = w;
      for (std::size_t k = 1; k < f.size(); ++k)
        row.entries.emplace_back(k - 1, detail::parse_real(f[k], feature_file, line_no));
    }
    rows.push_back(std::move(row));
  });
  if (width && dense_width && *width != *dense_width) {
    throw ValidationError("features.tsv: dense rows have " + std::to_string(*dense_width) +
                          " values but meta.tsv declares " + std::to_string(*width));
  }
  const std::size_t n_features = width.value_or(std::max(dense_width.value_or(0), max_index));
  if (max_index > n_features) throw ValidationError("features.tsv: feature index exceeds n_features");
  num::DenseMatrix features(n, n_features);
  for (const auto& row : rows)
    for (const auto& [idx, val] : row.entries) features(row.node, idx) = val;

  const fs::path edge_file = bundle / "edges.tsv";
  std::set<Edge> unique;
  LoadStats local;
  detail::for_each_row(edge_file, [&](const auto& f, std::size_t line_no) {
    if (f.size() != 2) throw ValidationError(detail::where(edge_file, line_no) + ": expected u<TAB>v");
    const std::size_t u = detail::checked_node(detail::parse_int(f[0], edge_file, line_no), n, edge_file, line_no);
    const std::size_t v = detail::checked_node(detail::parse_int(f[1], edge_file, line_no), n, edge_file, line_no);
    if (u == v) {
      ++local.self_loops_dropped;
      return;
    }
    if (!unique.insert({std::min(u, v), std::max(u, v)}).second) ++local.duplicate_edges;
  });
  if (stats != nullptr) *stats = local;

  AttributedGraph g;
  g.adjacency = adjacency_from_edges(n, std::vector<Edge>(unique.begin(), unique.end()));
  g.features = std::move(features);
  g.labels = std::move(labels);
  g.n_classes = n_classes;
  g.original_ids.resize(n);
  for (std::size_t v = 0; v < n; ++v) g.original_ids[v] = static_cast<std::int64_t>(v);
  g.validate();
  return g;
}

/// Split tags keyed by bundle node id, or nullopt when masks.tsv is absent.
inline std::optional<std::map<std::int64_t, SplitTag>> load_masks(const fs::path& bundle) {
  const fs::path file = bundle / "masks.tsv";
  if (!fs::exists(file)) return std::nullopt;
  std::map<std::int64_t, SplitTag> masks;
  detail::for_each_row(file, [&](const auto& f, std::size_t line_no) {
    if (f.size() != 2) throw ValidationError(detail::where(file, line_no) + ": expected id<TAB>tag");
    const auto id = detail::parse_int(f[0], file, line_no);
    SplitTag tag;
    if (f[1] == "train") tag = SplitTag::kTrain;
    else if (f[1] == "valid") tag = SplitTag::kValid;
    else if (f[1] == "test") tag = SplitTag::kTest;
    else throw ValidationError(detail::where(file, line_no) + ": unknown split tag '" + std::string(f[1]) + "'");
    masks[id] = tag;
  });
  return masks;
}

inline const char* to_string(SplitTag tag) {
  switch (tag) {
    case SplitTag::kTrain: return "train";
    case SplitTag::kValid: return "valid";
    case SplitTag::kTest: return "test";
  }
  return "?";
}

/// Writes `edges.tsv` for an adjacency, one line per undirected edge.
inline void write_edges(const fs::path& file, const num::SparseMatrix& adjacency) {
  std::ofstream out(file);
  if (!out) throw ValidationError("cannot write " + file.string());
  for (const auto& e : edge_list(adjacency)) out << e.u << '\t' << e.v << '\n';
}

/// Writes a complete bundle. Features use the idx:val form.
inline void write_bundle(const fs::path& dir, const AttributedGraph& g,
                         const std::map<std::int64_t, SplitTag>* masks = nullptr) {
  fs::create_directories(dir);
  {
    std::ofstream meta(dir / "meta.tsv");
    meta << "n_nodes\t" << g.n_nodes() << "\nn_features\t" << g.n_features() << "\nn_classes\t"
         << g.n_classes << '\n';
  }
  write_edges(dir / "edges.tsv", g.adjacency);
  {
    std::ofstream out(dir / "features.tsv");
    out.precision(17);
    for (std::size_t v = 0; v < g.n_nodes(); ++v) {
      out << v;
      const auto row = g.features.row(v);
      bool any = false;
      for (std::size_t k = 0; k < row.size(); ++k) {
        if (row[k] == 0.0) continue;
        out << '\t' << k << ':' << row[k];
        any = true;
      }
      // An all-zero row still needs one entry to stay in sparse form.
      if (!any && g.n_features() > 0) out << "\t0:0";
      out << '\n';
    }
  }
  {
    std::ofstream out(dir / "labels.tsv");
    for (std::size_t v = 0; v < g.n_nodes(); ++v) out << v << '\t' << g.labels[v] << '\n';
  }
  if (masks != nullptr) {
    std::ofstream out(dir / "masks.tsv");
    for (const auto& [id, tag] : *masks) out << id << '\t' << to_string(tag) << '\n';
  }
}

}  // namespace sailor::graph

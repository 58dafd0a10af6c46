#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <variant>
#include <vector>

#include "sailor/error.hpp"
#include "sailor/graph/homophily.hpp"

namespace sailor::trainer {

/// Six significant digits, the fixed format of every emitted table.
inline std::string format_cell(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

/// Tab-separated table with a header row; every row must match its width.
class TsvWriter {
 public:
  using Cell = std::variant<std::string, double, std::size_t, long long>;

  TsvWriter(const std::filesystem::path& path, std::vector<std::string> header)
      : path_(path), out_(path), width_(header.size()) {
    if (!out_) throw ValidationError("cannot write " + path.string());
    write_line(header);
  }

  void row(std::initializer_list<Cell> cells) {
    if (cells.size() != width_)
      throw ValidationError(path_.string() + ": row has " + std::to_string(cells.size()) + " cells, header has " +
                            std::to_string(width_));
    std::vector<std::string> text;
    for (const Cell& c : cells) {
      if (const auto* s = std::get_if<std::string>(&c)) text.push_back(*s);
      else if (const auto* d = std::get_if<double>(&c)) text.push_back(format_cell(*d));
      else if (const auto* z = std::get_if<std::size_t>(&c)) text.push_back(std::to_string(*z));
      else text.push_back(std::to_string(std::get<long long>(c)));
    }
    write_line(text);
  }

 private:
  void write_line(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "\t" : "") << cells[i];
    out_ << '\n';
  }

  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t width_;
};

/// Pointwise comparison of two homophily CDFs over a grid of thresholds.
struct CdfComparison {
  std::vector<double> grid;
  std::vector<double> original;
  std::vector<double> augmented;
  std::size_t points_not_above = 0;  // grid points where augmented <= original

  double fraction_not_above() const {
    return grid.empty() ? 0.0 : static_cast<double>(points_not_above) / static_cast<double>(grid.size());
  }
};

inline CdfComparison compare_cdfs(const graph::Cdf& original, const graph::Cdf& augmented,
                                  const std::vector<double>& grid) {
  CdfComparison r;
  r.grid = grid;
  for (double x : grid) {
    r.original.push_back(original.at(x));
    r.augmented.push_back(augmented.at(x));
    if (r.augmented.back() <= r.original.back()) ++r.points_not_above;
  }
  return r;
}

}  // namespace sailor::trainer

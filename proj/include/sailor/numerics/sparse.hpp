#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "sailor/error.hpp"
#include "sailor/numerics/dense.hpp"

namespace sailor::num {

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Compressed sparse row matrix. Column ids are sorted within each row.
class SparseMatrix {
 public:
  SparseMatrix() = default;

  SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> offsets,
               std::vector<std::size_t> indices, std::vector<double> values)
      : rows_(rows),
        cols_(cols),
        offsets_(std::move(offsets)),
        indices_(std::move(indices)),
        values_(std::move(values)) {
    validate();
  }

  /// Duplicate (row, col) entries are summed.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols,
                                    std::vector<Triplet> triplets) {
    for (const auto& t : triplets) {
      if (t.row >= rows || t.col >= cols) {
        throw ValidationError("SparseMatrix::from_triplets: entry out of bounds");
      }
    }
    std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    std::vector<std::size_t> offsets(rows + 1, 0);
    std::vector<std::size_t> indices;
    std::vector<double> values;
    indices.reserve(triplets.size());
    values.reserve(triplets.size());
    for (std::size_t k = 0; k < triplets.size();) {
      const auto& t = triplets[k];
      double v = 0.0;
      std::size_t j = k;
      for (; j < triplets.size() && triplets[j].row == t.row && triplets[j].col == t.col; ++j)
        v += triplets[j].value;
      indices.push_back(t.col);
      values.push_back(v);
      ++offsets[t.row + 1];
      k = j;
    }
    for (std::size_t r = 0; r < rows; ++r) offsets[r + 1] += offsets[r];
    return SparseMatrix(rows, cols, std::move(offsets), std::move(indices), std::move(values));
  }

  static SparseMatrix identity(std::size_t n) {
    std::vector<std::size_t> offsets(n + 1);
    std::vector<std::size_t> indices(n);
    for (std::size_t i = 0; i <= n; ++i) offsets[i] = i;
    for (std::size_t i = 0; i < n; ++i) indices[i] = i;
    return SparseMatrix(n, n, std::move(offsets), std::move(indices), std::vector<double>(n, 1.0));
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return indices_.size(); }
  std::size_t row_nnz(std::size_t r) const { return offsets_[r + 1] - offsets_[r]; }

  std::span<const std::size_t> row_indices(std::size_t r) const {
    return {indices_.data() + offsets_[r], row_nnz(r)};
  }
  std::span<const double> row_values(std::size_t r) const {
    return {values_.data() + offsets_[r], row_nnz(r)};
  }
  std::span<const std::size_t> offsets() const { return offsets_; }

  bool contains(std::size_t r, std::size_t c) const {
    const auto idx = row_indices(r);
    return std::binary_search(idx.begin(), idx.end(), c);
  }

  double at(std::size_t r, std::size_t c) const {
    const auto idx = row_indices(r);
    const auto it = std::lower_bound(idx.begin(), idx.end(), c);
    if (it == idx.end() || *it != c) return 0.0;
    return row_values(r)[static_cast<std::size_t>(it - idx.begin())];
  }

  SparseMatrix transpose() const {
    std::vector<Triplet> t;
    t.reserve(nnz());
    for (std::size_t r = 0; r < rows_; ++r) {
      const auto idx = row_indices(r);
      const auto val = row_values(r);
      for (std::size_t k = 0; k < idx.size(); ++k) t.push_back({idx[k], r, val[k]});
    }
    return from_triplets(cols_, rows_, std::move(t));
  }

  DenseMatrix to_dense() const {
    DenseMatrix d(rows_, cols_);
    for (std::size_t r = 0; r < rows_; ++r) {
      const auto idx = row_indices(r);
      const auto val = row_values(r);
      for (std::size_t k = 0; k < idx.size(); ++k) d(r, idx[k]) = val[k];
    }
    return d;
  }

  bool is_symmetric() const {
    if (rows_ != cols_) return false;
    for (std::size_t r = 0; r < rows_; ++r) {
      const auto idx = row_indices(r);
      const auto val = row_values(r);
      for (std::size_t k = 0; k < idx.size(); ++k)
        if (at(idx[k], r) != val[k]) return false;
    }
    return true;
  }

  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

 private:
  void validate() const {
    if (offsets_.size() != rows_ + 1 || offsets_.front() != 0 || offsets_.back() != indices_.size() ||
        indices_.size() != values_.size()) {
      throw ValidationError("SparseMatrix: inconsistent CSR arrays");
    }
    for (std::size_t r = 0; r < rows_; ++r) {
      if (offsets_[r] > offsets_[r + 1]) throw ValidationError("SparseMatrix: offsets not monotone");
      for (std::size_t k = offsets_[r]; k < offsets_[r + 1]; ++k) {
        if (indices_[k] >= cols_) throw ValidationError("SparseMatrix: column id out of range");
        if (k > offsets_[r] && indices_[k] <= indices_[k - 1])
          throw ValidationError("SparseMatrix: column ids not strictly sorted");
        if (!std::isfinite(values_[k])) throw ValidationError("SparseMatrix: non-finite value");
      }
    }
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<std::size_t> indices_;
  std::vector<double> values_;
};

/// Sparse-dense product A * H.
inline DenseMatrix spmm(const SparseMatrix& a, const DenseMatrix& h) {
  if (a.cols() != h.rows()) {
    throw ValidationError("spmm: sparse cols " + std::to_string(a.cols()) + " != dense rows " +
                          std::to_string(h.rows()));
  }
  DenseMatrix out(a.rows(), h.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto dst = out.row(r);
    const auto idx = a.row_indices(r);
    const auto val = a.row_values(r);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const auto src = h.row(idx[k]);
      const double w = val[k];
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += w * src[j];
    }
  }
  return out;
}

/// A^T * G without materializing the transpose.
inline DenseMatrix spmm_tn(const SparseMatrix& a, const DenseMatrix& g) {
  if (a.rows() != g.rows()) {
    throw ValidationError("spmm_tn: sparse rows " + std::to_string(a.rows()) + " != dense rows " +
                          std::to_string(g.rows()));
  }
  DenseMatrix out(a.cols(), g.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const auto src = g.row(r);
    const auto idx = a.row_indices(r);
    const auto val = a.row_values(r);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      auto dst = out.row(idx[k]);
      const double w = val[k];
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += w * src[j];
    }
  }
  return out;
}

/// D^-1/2 (A + I) D^-1/2 where D is the degree matrix of A + I.
inline SparseMatrix normalize_adjacency(const SparseMatrix& a) {
  if (a.rows() != a.cols()) throw ValidationError("normalize_adjacency: matrix is not square");
  const std::size_t n = a.rows();
  std::vector<Triplet> t;
  t.reserve(a.nnz() + n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto idx = a.row_indices(r);
    const auto val = a.row_values(r);
    for (std::size_t k = 0; k < idx.size(); ++k)
      if (idx[k] != r) t.push_back({r, idx[k], val[k]});
    t.push_back({r, r, 1.0});
  }
  SparseMatrix with_loops = SparseMatrix::from_triplets(n, n, std::move(t));
  std::vector<double> inv_sqrt(n);
  for (std::size_t r = 0; r < n; ++r) {
    double d = 0.0;
    for (double v : with_loops.row_values(r)) d += v;
    inv_sqrt[r] = 1.0 / std::sqrt(d);
  }
  std::vector<std::size_t> offsets(with_loops.offsets().begin(), with_loops.offsets().end());
  std::vector<std::size_t> indices;
  std::vector<double> values;
  indices.reserve(with_loops.nnz());
  values.reserve(with_loops.nnz());
  for (std::size_t r = 0; r < n; ++r) {
    const auto idx = with_loops.row_indices(r);
    const auto val = with_loops.row_values(r);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      indices.push_back(idx[k]);
      values.push_back(inv_sqrt[r] * val[k] * inv_sqrt[idx[k]]);
    }
  }
  return SparseMatrix(n, n, std::move(offsets), std::move(indices), std::move(values));
}

}  // namespace sailor::num

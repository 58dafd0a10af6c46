#pragma once

// Differentiable operations on Tape variables. Each op computes its forward
// value eagerly and registers the vector-Jacobian product for backward().

#include <cmath>
#include <cstddef>

#include "sailor/numerics/dense.hpp"
#include "sailor/numerics/sparse.hpp"
#include "sailor/numerics/tape.hpp"

namespace sailor::num {

namespace detail {
inline void require_same_tape(const Var& a, const Var& b, const char* where) {
  if (&a.tape() != &b.tape()) throw ValidationError(std::string(where) + ": vars on different tapes");
}
}  // namespace detail

inline Var matmul(const Var& a, const Var& b) {
  detail::require_same_tape(a, b, "matmul");
  return a.tape().record(matmul(a.value(), b.value()), {a, b},
                         [a, b](Tape& t, const DenseMatrix& g) {
                           if (a.requires_grad()) t.accumulate(a, matmul_nt(g, b.value()));
                           if (b.requires_grad()) t.accumulate(b, matmul_tn(a.value(), g));
                         });
}

/// Sparse-dense product; `a` must outlive the tape's backward pass.
inline Var spmm(const SparseMatrix& a, const Var& h) {
  const SparseMatrix* ap = &a;
  return h.tape().record(spmm(a, h.value()), {h}, [ap, h](Tape& t, const DenseMatrix& g) {
    t.accumulate(h, spmm_tn(*ap, g));
  });
}

inline Var add(const Var& a, const Var& b) {
  detail::require_same_tape(a, b, "add");
  a.value().require_same_shape(b.value(), "add");
  DenseMatrix out = a.value();
  out += b.value();
  return a.tape().record(std::move(out), {a, b}, [a, b](Tape& t, const DenseMatrix& g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

inline Var scale(const Var& a, double s) {
  DenseMatrix out = a.value();
  for (double& v : out.values()) v *= s;
  return a.tape().record(std::move(out), {a}, [a, s](Tape& t, const DenseMatrix& g) {
    DenseMatrix ga = g;
    for (double& v : ga.values()) v *= s;
    t.accumulate(a, ga);
  });
}

inline Var sub(const Var& a, const Var& b) { return add(a, scale(b, -1.0)); }

inline Var hadamard(const Var& a, const Var& b) {
  detail::require_same_tape(a, b, "hadamard");
  a.value().require_same_shape(b.value(), "hadamard");
  DenseMatrix out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  return a.tape().record(std::move(out), {a, b}, [a, b](Tape& t, const DenseMatrix& g) {
    if (a.requires_grad()) {
      DenseMatrix ga = g;
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] *= b.value()[i];
      t.accumulate(a, ga);
    }
    if (b.requires_grad()) {
      DenseMatrix gb = g;
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] *= a.value()[i];
      t.accumulate(b, gb);
    }
  });
}

/// Elementwise product with a constant matrix (noise, dropout masks).
inline Var hadamard(const Var& a, const DenseMatrix& c) {
  a.value().require_same_shape(c, "hadamard");
  DenseMatrix out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= c[i];
  return a.tape().record(std::move(out), {a}, [a, c](Tape& t, const DenseMatrix& g) {
    DenseMatrix ga = g;
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] *= c[i];
    t.accumulate(a, ga);
  });
}

inline Var exp(const Var& a) {
  DenseMatrix out = a.value();
  for (double& v : out.values()) v = std::exp(v);
  Var result = a.tape().record(out, {a}, [a, out](Tape& t, const DenseMatrix& g) {
    DenseMatrix ga = g;
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] *= out[i];
    t.accumulate(a, ga);
  });
  return result;
}

inline Var relu(const Var& a) {
  DenseMatrix out = a.value();
  for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  return a.tape().record(std::move(out), {a}, [a](Tape& t, const DenseMatrix& g) {
    DenseMatrix ga = g;
    for (std::size_t i = 0; i < ga.size(); ++i)
      if (!(a.value()[i] > 0.0)) ga[i] = 0.0;
    t.accumulate(a, ga);
  });
}

inline Var tanh(const Var& a) {
  DenseMatrix out = a.value();
  for (double& v : out.values()) v = std::tanh(v);
  return a.tape().record(out, {a}, [a, out](Tape& t, const DenseMatrix& g) {
    DenseMatrix ga = g;
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] *= 1.0 - out[i] * out[i];
    t.accumulate(a, ga);
  });
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline Var sigmoid(const Var& a) {
  DenseMatrix out = a.value();
  for (double& v : out.values()) v = sigmoid(v);
  return a.tape().record(out, {a}, [a, out](Tape& t, const DenseMatrix& g) {
    DenseMatrix ga = g;
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] *= out[i] * (1.0 - out[i]);
    t.accumulate(a, ga);
  });
}

inline Var softmax_rows(const Var& a) {
  DenseMatrix out = softmax_rows(a.value());
  return a.tape().record(out, {a}, [a, out](Tape& t, const DenseMatrix& g) {
    DenseMatrix ga(out.rows(), out.cols());
    for (std::size_t i = 0; i < out.rows(); ++i) {
      const auto y = out.row(i);
      const auto gy = g.row(i);
      double dot = 0.0;
      for (std::size_t j = 0; j < y.size(); ++j) dot += y[j] * gy[j];
      auto dst = ga.row(i);
      for (std::size_t j = 0; j < y.size(); ++j) dst[j] = y[j] * (gy[j] - dot);
    }
    t.accumulate(a, ga);
  });
}

/// Sum of all entries as a 1x1 value.
inline Var sum(const Var& a) {
  double s = 0.0;
  for (double v : a.value().values()) s += v;
  return a.tape().record(DenseMatrix::scalar(s), {a}, [a](Tape& t, const DenseMatrix& g) {
    t.accumulate(a, DenseMatrix(a.rows(), a.cols(), g.item()));
  });
}

/// Row-wise convex combination w * x + (1 - w) * y with w an N x 1 column.
inline Var fuse(const Var& x, const Var& y, const Var& w) {
  detail::require_same_tape(x, y, "fuse");
  detail::require_same_tape(x, w, "fuse");
  x.value().require_same_shape(y.value(), "fuse");
  if (w.cols() != 1 || w.rows() != x.rows()) {
    throw ValidationError("fuse: weight must be a column with one entry per row, got " +
                          w.value().shape_string());
  }
  DenseMatrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < out.rows(); ++i) {
    const double wi = w.value()(i, 0);
    for (std::size_t j = 0; j < out.cols(); ++j)
      out(i, j) = wi * x.value()(i, j) + (1.0 - wi) * y.value()(i, j);
  }
  return x.tape().record(std::move(out), {x, y, w}, [x, y, w](Tape& t, const DenseMatrix& g) {
    const DenseMatrix& wv = w.value();
    if (x.requires_grad()) {
      DenseMatrix gx = g;
      for (std::size_t i = 0; i < gx.rows(); ++i)
        for (double& v : gx.row(i)) v *= wv(i, 0);
      t.accumulate(x, gx);
    }
    if (y.requires_grad()) {
      DenseMatrix gy = g;
      for (std::size_t i = 0; i < gy.rows(); ++i)
        for (double& v : gy.row(i)) v *= 1.0 - wv(i, 0);
      t.accumulate(y, gy);
    }
    if (w.requires_grad()) {
      DenseMatrix gw(wv.rows(), 1);
      for (std::size_t i = 0; i < g.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < g.cols(); ++j)
          s += g(i, j) * (x.value()(i, j) - y.value()(i, j));
        gw(i, 0) = s;
      }
      t.accumulate(w, gw);
    }
  });
}

/// Copy of the value with no gradient path back to `a`.
inline Var detach(const Var& a) { return a.tape().constant(a.value()); }

}  // namespace sailor::num

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "sailor/error.hpp"
#include "sailor/numerics/dense.hpp"

namespace sailor::num {

/// A trainable matrix with its gradient and Adam moments.
struct Parameter {
  std::string name;
  DenseMatrix value;
  DenseMatrix grad;
  DenseMatrix m;
  DenseMatrix v;
  std::uint64_t step = 0;

  Parameter() = default;
  Parameter(std::string n, DenseMatrix init)
      : name(std::move(n)),
        value(std::move(init)),
        grad(value.rows(), value.cols()),
        m(value.rows(), value.cols()),
        v(value.rows(), value.cols()) {}

  void zero_grad() { grad.fill(0.0); }
};

class Tape;

/// Handle to a node recorded on a Tape. Valid while the tape is alive and not cleared.
class Var {
 public:
  Var() = default;

  const DenseMatrix& value() const;
  const DenseMatrix& grad() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  bool requires_grad() const;
  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Records differentiable operations in execution order; backward() replays
/// them in reverse and accumulates into Parameter::grad.
class Tape {
 public:
  using Backward = std::function<void(Tape&, const DenseMatrix& upstream)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(DenseMatrix value) {
    nodes_.push_back(Node{std::move(value), {}, {}, false, nullptr});
    return Var(this, nodes_.size() - 1);
  }

  Var parameter(Parameter& p) {
    nodes_.push_back(Node{p.value, {}, {}, true, &p});
    return Var(this, nodes_.size() - 1);
  }

  /// Appends an op result. The backward closure is kept only if some input needs a gradient.
  Var record(DenseMatrix value, std::initializer_list<Var> inputs, Backward backward) {
    if (!value.all_finite()) throw NumericError("non-finite value produced on tape");
    bool needs = false;
    for (const Var& in : inputs) {
      check_owned(in);
      needs = needs || nodes_[in.id_].requires_grad;
    }
    nodes_.push_back(Node{std::move(value), {}, needs ? std::move(backward) : Backward{}, needs,
                          nullptr});
    return Var(this, nodes_.size() - 1);
  }

  bool requires_grad(const Var& v) const { return nodes_[v.id_].requires_grad; }

  /// Adds g into the gradient of v. No-op for constants.
  void accumulate(const Var& v, const DenseMatrix& g) {
    Node& node = nodes_[v.id_];
    if (!node.requires_grad) return;
    if (node.grad.empty()) {
      node.value.require_same_shape(g, "Tape::accumulate");
      node.grad = g;
    } else {
      node.grad += g;
    }
  }

  void backward(const Var& root) {
    check_owned(root);
    if (root.value().size() != 1) throw ValidationError("Tape::backward: root must be a scalar");
    if (!nodes_[root.id_].requires_grad) return;
    nodes_[root.id_].grad = DenseMatrix::scalar(1.0);
    for (std::size_t i = root.id_ + 1; i-- > 0;) {
      Node& node = nodes_[i];
      if (node.grad.empty()) continue;
      if (node.param != nullptr) {
        node.param->grad += node.grad;
      } else if (node.backward) {
        node.backward(*this, node.grad);
      }
    }
  }

  const DenseMatrix& value(const Var& v) const { return nodes_[v.id_].value; }

  /// Gradient of v after backward(); an empty matrix if nothing flowed into v.
  const DenseMatrix& grad(const Var& v) const { return nodes_[v.id_].grad; }

  std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

 private:
  struct Node {
    DenseMatrix value;
    DenseMatrix grad;
    Backward backward;
    bool requires_grad;
    Parameter* param;
  };

  void check_owned(const Var& v) const {
    if (v.tape_ != this || v.id_ >= nodes_.size()) {
      throw ValidationError("Var does not belong to this tape");
    }
  }

  std::vector<Node> nodes_;
};

inline const DenseMatrix& Var::value() const { return tape_->value(*this); }
inline const DenseMatrix& Var::grad() const { return tape_->grad(*this); }
inline bool Var::requires_grad() const { return tape_->requires_grad(*this); }

}  // namespace sailor::num

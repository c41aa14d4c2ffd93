#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "editsql/tensor.hpp"

namespace editsql {

// Reverse-mode autodiff over vector-valued nodes. Scalars are size-1
// vectors. Parameters live outside the tape (see ModelParams); the tape
// accumulates their gradients into caller-owned buffers.
class Tape {
 public:
  using Var = int;
  static constexpr Var kNone = -1;

  struct ParamRef {
    const Tensor* value;
    Tensor* grad;  // may be null when gradients are not wanted
  };

  // Leaf holding a constant (no gradient flows into it).
  Var constant(Tensor t);
  // Leaf bound to an external parameter tensor.
  Var param(const Tensor* value, Tensor* grad);

  // y = M x (M must be a param/constant matrix node)
  Var matvec(Var m, Var x);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var cmult(Var a, Var b);
  Var scalar_mul(Var a, double s);
  Var concat(const std::vector<Var>& parts);
  Var slice(Var a, std::size_t start, std::size_t len);
  Var tanh_of(Var a);
  Var sigmoid_of(Var a);
  Var softmax(Var a);
  Var log_of(Var a);
  // scalar = a . b
  Var dot(Var a, Var b);
  // scores[i] = q . keys[i]
  Var dots(Var q, const std::vector<Var>& keys);
  // sum_i w[i] * vecs[i], |w| == |vecs|
  Var weighted_sum(Var w, const std::vector<Var>& vecs);
  Var average(const std::vector<Var>& vecs);
  // scalar = sum of a[idx] over idx in indices
  Var gather_sum(Var a, std::vector<std::size_t> indices);
  Var pick(Var a, std::size_t index);
  // scalar ops (size-1 operands)
  Var mul(Var a, Var b);
  Var one_minus(Var a);
  Var add_scalars(const std::vector<Var>& xs);
  Var neg(Var a);
  Var zeros(std::size_t n);

  const Tensor& value(Var v) const { return nodes_[v].val; }
  const Tensor& grad(Var v) const { return nodes_[v].grad; }
  std::size_t size() const { return nodes_.size(); }

  // Backpropagate from a size-1 loss node; accumulates into param grads.
  void backward(Var loss);

  void clear() { nodes_.clear(); }

 private:
  struct Node {
    Tensor val;
    Tensor grad;
    std::function<void(Tape&)> back;  // null for leaves without inputs
    ParamRef pref{nullptr, nullptr};
  };

  Var push(Tensor val, std::function<void(Tape&)> back);
  Tensor& grad_mut(Var v) { return nodes_[v].grad; }

  std::vector<Node> nodes_;
};

}  // namespace editsql

#include "editsql/tape.hpp"

#include <cmath>
#include <utility>

#include "editsql/kernels.hpp"

namespace editsql {

namespace {
const kernels::Ops& K() { return kernels::active(); }
}  // namespace

Tape::Var Tape::push(Tensor val, std::function<void(Tape&)> back) {
  Node n;
  n.grad = Tensor(val.rows, val.cols);
  n.val = std::move(val);
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return static_cast<Var>(nodes_.size() - 1);
}

Tape::Var Tape::constant(Tensor t) { return push(std::move(t), nullptr); }

Tape::Var Tape::param(const Tensor* value, Tensor* grad) {
  Var v = push(*value, nullptr);
  nodes_[v].pref = {value, grad};
  return v;
}

Tape::Var Tape::zeros(std::size_t n) { return constant(Tensor(n)); }

Tape::Var Tape::matvec(Var m, Var x) {
  const Tensor& M = value(m);
  const Tensor& X = value(x);
  if (M.cols != X.rows || X.cols != 1) throw Error("matvec: shape mismatch");
  Tensor y(M.rows);
  K().matvec(M.data(), X.data(), y.data(), M.rows, M.cols);
  const Var out = static_cast<Var>(nodes_.size());
  return push(std::move(y), [m, x, out](Tape& t) {
    const Tensor& gy = t.grad(out);
    const Tensor& M = t.value(m);
    const Tensor& X = t.value(x);
    // dM += gy x^T ; dx += M^T gy
    K().outer_acc(gy.data(), X.data(), t.grad_mut(m).data(), M.rows, M.cols);
    K().matvec_t_acc(M.data(), gy.data(), t.grad_mut(x).data(), M.rows, M.cols);
  });
}

Tape::Var Tape::add(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (!A.same_shape(B)) throw Error("add: shape mismatch");
  Tensor out_t(A.rows, A.cols);
  K().add(A.data(), B.data(), out_t.data(), A.size());
  const Var out = static_cast<Var>(nodes_.size());
  return push(std::move(out_t), [a, b, out](Tape& t) {
    const Tensor& g = t.grad(out);
    K().axpy(1.0, g.data(), t.grad_mut(a).data(), g.size());
    K().axpy(1.0, g.data(), t.grad_mut(b).data(), g.size());
  });
}

Tape::Var Tape::sub(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (!A.same_shape(B)) throw Error("sub: shape mismatch");
  Tensor out_t(A.rows, A.cols);
  for (std::size_t i = 0; i < A.size(); ++i) out_t[i] = A[i] - B[i];
  const Var out = static_cast<Var>(nodes_.size());
  return push(std::move(out_t), [a, b, out](Tape& t) {
    const Tensor& g = t.grad(out);
    K().axpy(1.0, g.data(), t.grad_mut(a).data(), g.size());
    K().axpy(-1.0, g.data(), t.grad_mut(b).data(), g.size());
  });
}

Tape::Var Tape::cmult(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (!A.same_shape(B)) throw Error("cmult: shape mismatch");
  Tensor out_t(A.rows, A.cols);
  K().hadamard(A.data(), B.data(), out_t.data(), A.size());
  const Var out = static_cast<Var>(nodes_.size());
  return push(std::move(out_t), [a, b, out](Tape& t) {
    const Tensor& g = t.grad(out);
    const std::size_t n = g.size();
    Tensor tmp(n);
    K().hadamard(g.data(), t.value(b).data(), tmp.data(), n);
    K().axpy(1.0, tmp.data(), t.grad_mut(a).data(), n);
    K().hadamard(g.data(), t.value(a).data(), tmp.data(), n);
    K().axpy(1.0, tmp.data(), t.grad_mut(b).data(), n);
  });
}

Tape::Var Tape::scalar_mul(Var a, double s) {
  Tensor out_t = value(a);
  K().scale(s, out_t.data(), out_t.size());
  const Var out = static_cast<Var>(nodes_.size());
  return push(std::move(out_t), [a, s, out](Tape& t) {
    const Tensor& g = t.grad(out);
    K().axpy(s, g.data(), t.grad_mut(a).data(), g.size());
  });
}

Tape::Var Tape::concat(const std::vector<Var>& parts) {
  if (parts.empty()) throw Error("concat: empty");
  std::size_t n = 0;
  for (Var p : parts) n += value(p).size();
  Tensor out_t(n);
  std::size_t off = 0;
  for (Var p : parts) {
    const Tensor& pv = value(p);
    std::copy(pv.v.begin(), pv.v.end(), out_t.v.begin() + off);
    off += pv.size();
  }
  const Var out = static_cast<Var>(nodes_.size());
  return push(std::move(out_t), [parts, out](Tape& t) {
    const Tensor& g = t.grad(out);
    std::size_t off = 0;
    for (Var p : parts) {
      Tensor& pg = t.grad_mut(p);
      K().axpy(1.0, g.data() + off, pg.data(), pg.size());
      off += pg.size();
    }
  });
}

Tape::Var Tape::slice(Var a, std::size_t start, std::size_t len) {
  const Tensor& A = value(a);
  if (start + len > A.size()) throw Error("slice: out of range");
  Tensor out_t(len);
  std::copy(A.v.begin() + start, A.v.begin() + start + len, out_t.v.begin());
  const Var out = static_cast<Var>(nodes_.size());
  return push(std::move(out_t), [a, start, len, out](Tape& t) {
    K().axpy(1.0, t.grad(out).data(), t.grad_mut(a).data() + start, len);
  });
}

Tape::Var Tape::tanh_of(Var a) {
  Tensor out_t = value(a);
  for (double& x : out_t.v) x = std::tanh(x);
  const Var out = static_cast<Var>(nodes_.size());
  return push(std::move(out_t), [a, out](Tape& t) {
    const Tensor& y = t.value(out);
    const Tensor& g = t.grad(out);
    Tensor& ga = t.grad_mut(a);
    for (std::size_t i = 0; i < y.size(); ++i)
      ga[i] += g[i] * (1.0 - y[i] * y[i]);
  });
}

Tape::Var Tape::sigmoid_of(Var a) {
  Tensor out_t = value(a);
  for (double& x : out_t.v) x = 1.0 / (1.0 + std::exp(-x));
  const Var out = static_cast<Var>(nodes_.size());
  return push(std::move(out_t), [a, out](Tape& t) {
    const Tensor& y = t.value(out);
    const Tensor& g = t.grad(out);
    Tensor& ga = t.grad_mut(a);
    for (std::size_t i = 0; i < y.size(); ++i)
      ga[i] += g[i] * y[i] * (1.0 - y[i]);
  });
}

Tape::Var Tape::softmax(Var a) {
  const Tensor& A = value(a);
  if (A.size() == 0) throw Error("softmax: empty support");
  Tensor out_t(A.rows, A.cols);
  double mx = A[0];
  for (double x : A.v) mx = std::max(mx, x);
  double z = 0.0;
  for (std::size_t i = 0; i < A.size(); ++i) {
    out_t[i] = std::exp(A[i] - mx);
    z += out_t[i];
  }
  for (double& x : out_t.v) x /= z;
  const Var out = static_cast<Var>(nodes_.size());
  return push(std::move(out_t), [a, out](Tape& t) {
    const Tensor& y = t.value(out);
    const Tensor& g = t.grad(out);
    const double s = K().dot(y.data(), g.data(), y.size());
    Tensor& ga = t.grad_mut(a);
    for (std::size_t i = 0; i < y.size(); ++i) ga[i] += y[i] * (g[i] - s);
  });
}

Tape::Var Tape::log_of(Var a) {
  Tensor out_t = value(a);
  for (double& x : out_t.v) x = std::log(x);
  const Var out = static_cast<Var>(nodes_.size());
  return push(std::move(out_t), [a, out](Tape& t) {
    const Tensor& x = t.value(a);
    const Tensor& g = t.grad(out);
    Tensor& ga = t.grad_mut(a);
    for (std::size_t i = 0; i < x.size(); ++i) ga[i] += g[i] / x[i];
  });
}

Tape::Var Tape::dot(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (A.size() != B.size()) throw Error("dot: shape mismatch");
  Tensor out_t(1);
  out_t[0] = K().dot(A.data(), B.data(), A.size());
  const Var out = static_cast<Var>(nodes_.size());
  return push(std::move(out_t), [a, b, out](Tape& t) {
    const double g = t.grad(out)[0];
    const std::size_t n = t.value(a).size();
    K().axpy(g, t.value(b).data(), t.grad_mut(a).data(), n);
    K().axpy(g, t.value(a).data(), t.grad_mut(b).data(), n);
  });
}

Tape::Var Tape::dots(Var q, const std::vector<Var>& keys) {
  const Tensor& Q = value(q);
  Tensor out_t(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const Tensor& Ki = value(keys[i]);
    if (Ki.size() != Q.size()) throw Error("dots: shape mismatch");
    out_t[i] = K().dot(Q.data(), Ki.data(), Q.size());
  }
  const Var out = static_cast<Var>(nodes_.size());
  return push(std::move(out_t), [q, keys, out](Tape& t) {
    const Tensor& g = t.grad(out);
    const std::size_t n = t.value(q).size();
    for (std::size_t i = 0; i < keys.size(); ++i) {
      K().axpy(g[i], t.value(keys[i]).data(), t.grad_mut(q).data(), n);
      K().axpy(g[i], t.value(q).data(), t.grad_mut(keys[i]).data(), n);
    }
  });
}

Tape::Var Tape::weighted_sum(Var w, const std::vector<Var>& vecs) {
  const Tensor& W = value(w);
  if (W.size() != vecs.size()) throw Error("weighted_sum: size mismatch");
  if (vecs.empty()) throw Error("weighted_sum: empty");
  Tensor out_t(value(vecs[0]).size());
  for (std::size_t i = 0; i < vecs.size(); ++i)
    K().axpy(W[i], value(vecs[i]).data(), out_t.data(), out_t.size());
  const Var out = static_cast<Var>(nodes_.size());
  return push(std::move(out_t), [w, vecs, out](Tape& t) {
    const Tensor& g = t.grad(out);
    const Tensor& W = t.value(w);
    Tensor& gw = t.grad_mut(w);
    for (std::size_t i = 0; i < vecs.size(); ++i) {
      gw[i] += K().dot(g.data(), t.value(vecs[i]).data(), g.size());
      K().axpy(W[i], g.data(), t.grad_mut(vecs[i]).data(), g.size());
    }
  });
}

Tape::Var Tape::average(const std::vector<Var>& vecs) {
  if (vecs.empty()) throw Error("average: empty");
  Tensor w(vecs.size());
  std::fill(w.v.begin(), w.v.end(), 1.0 / static_cast<double>(vecs.size()));
  return weighted_sum(constant(std::move(w)), vecs);
}

Tape::Var Tape::gather_sum(Var a, std::vector<std::size_t> indices) {
  const Tensor& A = value(a);
  Tensor out_t(1);
  for (std::size_t idx : indices) {
    if (idx >= A.size()) throw Error("gather_sum: index out of range");
    out_t[0] += A[idx];
  }
  const Var out = static_cast<Var>(nodes_.size());
  return push(std::move(out_t), [a, indices = std::move(indices), out](Tape& t) {
    const double g = t.grad(out)[0];
    Tensor& ga = t.grad_mut(a);
    for (std::size_t idx : indices) ga[idx] += g;
  });
}

Tape::Var Tape::pick(Var a, std::size_t index) {
  return gather_sum(a, {index});
}

Tape::Var Tape::mul(Var a, Var b) {
  if (value(a).size() != 1 || value(b).size() != 1)
    throw Error("mul: scalar operands required");
  return cmult(a, b);
}

Tape::Var Tape::one_minus(Var a) {
  if (value(a).size() != 1) throw Error("one_minus: scalar required");
  Tensor one(1);
  one[0] = 1.0;
  return sub(constant(std::move(one)), a);
}

Tape::Var Tape::add_scalars(const std::vector<Var>& xs) {
  if (xs.empty()) throw Error("add_scalars: empty");
  Var acc = xs[0];
  for (std::size_t i = 1; i < xs.size(); ++i) acc = add(acc, xs[i]);
  return acc;
}

Tape::Var Tape::neg(Var a) { return scalar_mul(a, -1.0); }

void Tape::backward(Var loss) {
  if (value(loss).size() != 1) throw Error("backward: loss must be scalar");
  for (auto& n : nodes_) n.grad.zero();
  nodes_[loss].grad[0] = 1.0;
  for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
    if (nodes_[i].back) nodes_[i].back(*this);
    if (nodes_[i].pref.grad) {
      Tensor& g = *nodes_[i].pref.grad;
      if (!g.same_shape(nodes_[i].grad)) throw Error("param grad shape mismatch");
      K().axpy(1.0, nodes_[i].grad.data(), g.data(), g.size());
    }
  }
}

}  // namespace editsql

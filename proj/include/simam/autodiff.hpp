#pragma once

// Reverse-mode differentiation over Tensor4. Ops build a graph of Node
// records; backward() linearizes the reachable subgraph into a GradTape
// (topological order) and replays it in reverse, accumulating gradients.

#include <algorithm>
#include <functional>
#include <memory>
#include <unordered_set>
#include <vector>

#include "simam/conv.hpp"
#include "simam/ops.hpp"

namespace simam {

template <class T>
struct Node {
  Tensor4<T> value;
  Tensor4<T> grad;  // allocated lazily during backward
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node<T>>> parents;
  std::function<void(Node<T>&)> backprop;  // pushes this->grad into parents

  Tensor4<T>& ensure_grad() {
    if (grad.shape.numel() == 0) grad = Tensor4<T>::zeros(value.shape);
    return grad;
  }
};

template <class T>
class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node<T>> n) : node_(std::move(n)) {}

  /// Lift a tensor into the graph. Gradient is tracked when either the
  /// tensor's requires_grad flag or the argument says so.
  static Var leaf(Tensor4<T> value, bool requires_grad = false) {
    auto n = std::make_shared<Node<T>>();
    n->requires_grad = requires_grad || value.requires_grad;
    n->value = std::move(value);
    return Var(std::move(n));
  }

  static Var constant(Tensor4<T> value) { return leaf(std::move(value), false); }

  const Tensor4<T>& value() const { return node_->value; }
  Tensor4<T>& value() { return node_->value; }
  const Tensor4<T>& grad() const { return node_->grad; }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  const std::shared_ptr<Node<T>>& node() const { return node_; }
  bool defined() const { return node_ != nullptr; }
  Shape4 shape() const { return node_->value.shape; }

  void zero_grad() {
    if (node_) node_->grad = Tensor4<T>();
  }

 private:
  std::shared_ptr<Node<T>> node_;
};

namespace ad {

template <class T>
Var<T> make_op(Tensor4<T> value, std::vector<Var<T>> inputs,
               std::function<void(Node<T>&)> backprop) {
  auto n = std::make_shared<Node<T>>();
  n->value = std::move(value);
  for (auto& in : inputs) {
    n->requires_grad = n->requires_grad || in.requires_grad();
    n->parents.push_back(in.node());
  }
  if (n->requires_grad) n->backprop = std::move(backprop);
  return Var<T>(std::move(n));
}

}  // namespace ad

/// Ordered record of the ops reaching a root, ready for reverse replay.
template <class T>
class GradTape {
 public:
  static GradTape record(const Var<T>& root) {
    GradTape tape;
    std::unordered_set<const Node<T>*> seen;
    // iterative DFS, children pushed after their parents
    std::vector<std::pair<std::shared_ptr<Node<T>>, bool>> stack{{root.node(), false}};
    while (!stack.empty()) {
      auto [n, expanded] = stack.back();
      stack.pop_back();
      if (!n || !n->requires_grad) continue;
      if (expanded) {
        tape.order_.push_back(n);
        continue;
      }
      if (!seen.insert(n.get()).second) continue;
      stack.push_back({n, true});
      for (auto& p : n->parents) stack.push_back({p, false});
    }
    return tape;
  }

  std::size_t size() const { return order_.size(); }

  /// Seeds d(root)/d(root) = 1 and pushes gradients to every recorded node.
  void backward() {
    if (order_.empty()) return;
    auto& root = *order_.back();
    if (root.value.numel() != 1)
      throw std::invalid_argument("backward: root must be scalar, got " + root.value.shape.str());
    root.ensure_grad().data[0] = T(1);
    for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
      Node<T>& n = **it;
      if (n.backprop && n.grad.numel() != 0) n.backprop(n);
    }
  }

 private:
  std::vector<std::shared_ptr<Node<T>>> order_;
};

template <class T>
GradTape<T> backward(const Var<T>& loss) {
  auto tape = GradTape<T>::record(loss);
  tape.backward();
  return tape;
}

// ---- primitive ops ----

namespace ad {

template <class T>
void accumulate(Node<T>& parent, const Tensor4<T>& delta) {
  auto& g = parent.ensure_grad();
  kern::ops<T>().add(g.ptr(), delta.ptr(), g.ptr(), g.data.size());
}

template <class T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  auto pa = a.node(), pb = b.node();
  return make_op<T>(simam::add(a.value(), b.value()), {a, b}, [pa, pb](Node<T>& n) {
    const auto& k = kern::ops<T>();
    if (pa->requires_grad) {
      auto& g = pa->ensure_grad();
      k.add(g.ptr(), n.grad.ptr(), g.ptr(), g.data.size());
    }
    if (pb->requires_grad) {
      auto& g = pb->ensure_grad();
      k.add(g.ptr(), n.grad.ptr(), g.ptr(), g.data.size());
    }
  });
}

template <class T>
Var<T> sub(const Var<T>& a, const Var<T>& b) {
  auto pa = a.node(), pb = b.node();
  return make_op<T>(simam::sub(a.value(), b.value()), {a, b}, [pa, pb](Node<T>& n) {
    const auto& k = kern::ops<T>();
    if (pa->requires_grad) {
      auto& g = pa->ensure_grad();
      k.add(g.ptr(), n.grad.ptr(), g.ptr(), g.data.size());
    }
    if (pb->requires_grad) {
      auto& g = pb->ensure_grad();
      k.axpy(T(-1), n.grad.ptr(), g.ptr(), g.data.size());
    }
  });
}

template <class T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
  auto pa = a.node(), pb = b.node();
  return make_op<T>(simam::mul(a.value(), b.value()), {a, b}, [pa, pb](Node<T>& n) {
    const auto& k = kern::ops<T>();
    if (pa->requires_grad)
      k.muladd(n.grad.ptr(), pb->value.ptr(), pa->ensure_grad().ptr(), n.grad.data.size());
    if (pb->requires_grad)
      k.muladd(n.grad.ptr(), pa->value.ptr(), pb->ensure_grad().ptr(), n.grad.data.size());
  });
}

template <class T>
Var<T> div(const Var<T>& a, const Var<T>& b) {
  auto pa = a.node(), pb = b.node();
  Tensor4<T> out = simam::div(a.value(), b.value());
  return make_op<T>(std::move(out), {a, b}, [pa, pb](Node<T>& n) {
    const std::size_t m = n.grad.data.size();
    if (pa->requires_grad) {
      auto& g = pa->ensure_grad();
      for (std::size_t i = 0; i < m; ++i) g.data[i] += n.grad.data[i] / pb->value.data[i];
    }
    if (pb->requires_grad) {
      auto& g = pb->ensure_grad();
      for (std::size_t i = 0; i < m; ++i)
        g.data[i] -= n.grad.data[i] * n.value.data[i] / pb->value.data[i];
    }
  });
}

template <class T>
Var<T> add_scalar(const Var<T>& a, T s) {
  auto pa = a.node();
  return make_op<T>(simam::add_scalar(a.value(), s), {a}, [pa](Node<T>& n) {
    auto& g = pa->ensure_grad();
    kern::ops<T>().add(g.ptr(), n.grad.ptr(), g.ptr(), g.data.size());
  });
}

template <class T>
Var<T> mul_scalar(const Var<T>& a, T s) {
  auto pa = a.node();
  return make_op<T>(simam::mul_scalar(a.value(), s), {a}, [pa, s](Node<T>& n) {
    kern::ops<T>().axpy(s, n.grad.ptr(), pa->ensure_grad().ptr(), n.grad.data.size());
  });
}

template <class T>
Var<T> sigmoid(const Var<T>& a) {
  auto pa = a.node();
  return make_op<T>(simam::sigmoid(a.value()), {a}, [pa](Node<T>& n) {
    auto& g = pa->ensure_grad();
    for (std::size_t i = 0; i < g.data.size(); ++i) {
      const T y = n.value.data[i];
      g.data[i] += n.grad.data[i] * y * (T(1) - y);
    }
  });
}

template <class T>
Var<T> silu(const Var<T>& a) {
  auto pa = a.node();
  Tensor4<T> sig = simam::sigmoid(a.value());
  Tensor4<T> out = simam::mul(a.value(), sig);
  return make_op<T>(std::move(out), {a}, [pa, sig = std::move(sig)](Node<T>& n) {
    auto& g = pa->ensure_grad();
    for (std::size_t i = 0; i < g.data.size(); ++i) {
      const T s = sig.data[i], x = pa->value.data[i];
      g.data[i] += n.grad.data[i] * (s + x * s * (T(1) - s));
    }
  });
}

template <class T>
Var<T> relu(const Var<T>& a) {
  auto pa = a.node();
  return make_op<T>(simam::relu(a.value()), {a}, [pa](Node<T>& n) {
    auto& g = pa->ensure_grad();
    for (std::size_t i = 0; i < g.data.size(); ++i)
      if (pa->value.data[i] > T(0)) g.data[i] += n.grad.data[i];
  });
}

/// Mean over H,W; output (N,C,1,1). Doubles as global average pooling.
template <class T>
Var<T> mean_spatial(const Var<T>& a) {
  auto pa = a.node();
  return make_op<T>(simam::mean_spatial(a.value()), {a}, [pa](Node<T>& n) {
    auto& g = pa->ensure_grad();
    const Shape4 s = g.shape;
    const std::size_t hw = static_cast<std::size_t>(s.spatial());
    const T inv = T(1) / static_cast<T>(s.spatial());
    for (std::int64_t b = 0; b < s.n; ++b)
      for (std::int64_t c = 0; c < s.c; ++c)
        kern::ops<T>().add_scalar(n.grad.at(b, c, 0, 0) * inv, g.channel_ptr(b, c), hw);
  });
}

/// (N,C,1,1) -> (N,C,H,W); backward sums over the expanded extent.
template <class T>
Var<T> expand_spatial(const Var<T>& a, std::int64_t h, std::int64_t w) {
  auto pa = a.node();
  return make_op<T>(simam::expand_spatial(a.value(), h, w), {a}, [pa](Node<T>& n) {
    auto& g = pa->ensure_grad();
    const Shape4 s = n.grad.shape;
    for (std::int64_t b = 0; b < s.n; ++b)
      for (std::int64_t c = 0; c < s.c; ++c)
        g.at(b, c, 0, 0) += static_cast<T>(
            kern::ops<T>().sum(n.grad.channel_ptr(b, c), static_cast<std::size_t>(s.spatial())));
  });
}

template <class T>
Var<T> sum_all(const Var<T>& a) {
  auto pa = a.node();
  return make_op<T>(Tensor4<T>::scalar(static_cast<T>(simam::sum(a.value()))), {a},
                    [pa](Node<T>& n) {
                      auto& g = pa->ensure_grad();
                      kern::ops<T>().add_scalar(n.grad.data[0], g.ptr(), g.data.size());
                    });
}

template <class T>
Var<T> conv2d(const Var<T>& x, const Var<T>& w, const std::optional<Var<T>>& bias,
              const ConvSpec& spec) {
  std::vector<Var<T>> inputs{x, w};
  if (bias) inputs.push_back(*bias);
  auto px = x.node(), pw = w.node();
  auto pb = bias ? bias->node() : nullptr;
  Tensor4<T> out = simam::conv2d(x.value(), w.value(), bias ? &bias->value() : nullptr, spec);
  return make_op<T>(std::move(out), std::move(inputs), [px, pw, pb, spec](Node<T>& n) {
    Tensor4<T>* gx = px->requires_grad ? &px->ensure_grad() : nullptr;
    Tensor4<T>* gw = pw->requires_grad ? &pw->ensure_grad() : nullptr;
    Tensor4<T>* gb = (pb && pb->requires_grad) ? &pb->ensure_grad() : nullptr;
    conv2d_backward(px->value, pw->value, spec, n.grad, gx, gw, gb);
  });
}

/// x (N,Cin,1,1), weight (Cout,Cin,1,1), bias (1,Cout,1,1) -> (N,Cout,1,1)
template <class T>
Var<T> linear(const Var<T>& x, const Var<T>& w, const std::optional<Var<T>>& bias) {
  const Shape4 xs = x.shape(), ws = w.shape();
  if (xs.h != 1 || xs.w != 1 || ws.h != 1 || ws.w != 1 || ws.c != xs.c)
    throw std::invalid_argument("linear: bad shapes x=" + xs.str() + " w=" + ws.str());
  const std::size_t n = static_cast<std::size_t>(xs.n), cin = static_cast<std::size_t>(xs.c),
                    cout = static_cast<std::size_t>(ws.n);
  const auto& k = kern::ops<T>();

  Tensor4<T> out(xs.n, ws.n, 1, 1);
  std::vector<T> wt(cin * cout);
  transpose(w.value().ptr(), wt.data(), cout, cin);
  k.gemm_nn(x.value().ptr(), wt.data(), out.ptr(), n, cout, cin, false);
  if (bias) {
    const auto& bv = bias->value();
    if (bv.numel() != ws.n) throw std::invalid_argument("linear: bias size mismatch");
    for (std::size_t i = 0; i < n; ++i)
      k.add(out.ptr() + i * cout, bv.ptr(), out.ptr() + i * cout, cout);
  }

  std::vector<Var<T>> inputs{x, w};
  if (bias) inputs.push_back(*bias);
  auto px = x.node(), pw = w.node();
  auto pb = bias ? bias->node() : nullptr;
  return make_op<T>(std::move(out), std::move(inputs), [px, pw, pb, n, cin, cout](Node<T>& nd) {
    const auto& k = kern::ops<T>();
    if (px->requires_grad) {
      // dX[N x Cin] += dY[N x Cout] · W[Cout x Cin]
      k.gemm_nn(nd.grad.ptr(), pw->value.ptr(), px->ensure_grad().ptr(), n, cin, cout, true);
    }
    if (pw->requires_grad) {
      // dW[Cout x Cin] += dY^T[Cout x N] · X[N x Cin]
      std::vector<T> gyt(n * cout);
      transpose(nd.grad.ptr(), gyt.data(), n, cout);
      k.gemm_nn(gyt.data(), px->value.ptr(), pw->ensure_grad().ptr(), cout, cin, n, true);
    }
    if (pb && pb->requires_grad) {
      auto& g = pb->ensure_grad();
      for (std::size_t i = 0; i < n; ++i)
        k.add(g.ptr(), nd.grad.ptr() + i * cout, g.ptr(), cout);
    }
  });
}

}  // namespace ad
}  // namespace simam

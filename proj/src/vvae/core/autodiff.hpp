#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "vvae/core/ops.hpp"
#include "vvae/core/tensor.hpp"

// Define-by-run reverse-mode tape. Nodes are created in topological order,
// so the backward pass is a single reverse sweep. One tape serves one loss;
// a second backward without building a fresh tape is an error.
//
// Model forwards are written once against shared op names; the overloads in
// this namespace make the same code record a graph when fed Var<T> instead
// of Tensor<T>.

namespace vvae::ad {

template <typename T>
class Tape;

template <typename T>
struct Node {
  Tape<T>* tape = nullptr;
  Tensor<T> value;
  Tensor<T> grad;
  bool has_grad = false;
  bool needs = false;  // reachable from a parameter
  std::function<void()> bw;
};

template <typename T>
class Var {
 public:
  Var() = default;
  explicit Var(Node<T>* n) : n_(n) {}
  const Tensor<T>& value() const { return n_->value; }
  Node<T>* node() const { return n_; }
  bool defined() const { return n_ != nullptr; }

 private:
  Node<T>* n_ = nullptr;
};

template <typename T>
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var<T> param(Tensor<T> v) { return Var<T>(make(std::move(v), true)); }
  Var<T> constant(Tensor<T> v) { return Var<T>(make(std::move(v), false)); }

  Node<T>* make(Tensor<T> value, bool needs) {
    nodes_.push_back(std::make_unique<Node<T>>());
    Node<T>* n = nodes_.back().get();
    n->tape = this;
    n->value = std::move(value);
    n->needs = needs;
    return n;
  }

  // Seeds d(loss)/d(loss) = 1 and sweeps the tape in reverse.
  void backward(const Var<T>& loss) {
    if (consumed_)
      throw std::runtime_error("tape: second backward without reset");
    if (!loss.defined() || loss.node()->tape != this)
      throw std::runtime_error("tape: loss not on this tape");
    if (loss.value().numel() != 1)
      throw shape_error("backward: loss must be scalar, got " +
                        shape_str(loss.value().shape()));
    consumed_ = true;
    Node<T>* root = loss.node();
    root->grad = Tensor<T>(root->value.shape(), T(1));
    root->has_grad = true;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
      Node<T>* n = it->get();
      if (n->has_grad && n->bw) n->bw();
    }
  }

  // Gradient of a parameter; zeros when nothing flowed into it.
  Tensor<T> grad(const Var<T>& v) const {
    if (!v.defined()) throw std::runtime_error("grad of undefined var");
    if (v.node()->has_grad) return v.node()->grad;
    return Tensor<T>(v.value().shape());
  }

  bool consumed() const { return consumed_; }
  std::size_t size() const { return nodes_.size(); }

 private:
  std::vector<std::unique_ptr<Node<T>>> nodes_;
  bool consumed_ = false;
};

template <typename T>
void kern_add_inplace(Tensor<T>& dst, const Tensor<T>& src);

template <typename T>
void accumulate(Node<T>* n, Tensor<T>&& g) {
  if (!n->needs) return;
  if (!n->has_grad) {
    n->grad = std::move(g);
    n->has_grad = true;
  } else {
    kern_add_inplace(n->grad, g);
  }
}

// --- op overloads -----------------------------------------------------
// Forward values are computed by the plain ops; closures capture parent
// nodes and re-derive local gradients in the sweep.

template <typename T>
Var<T> matmul_lastdim(Var<T> x, Var<T> w);
template <typename T>
Var<T> matmul_lastdim_t(Var<T> x, Var<T> w);
template <typename T>
Var<T> add_bias_lastdim(Var<T> x, Var<T> b);
template <typename T>
Var<T> add(Var<T> a, Var<T> b);
template <typename T>
Var<T> sub(Var<T> a, Var<T> b);
template <typename T>
Var<T> mul(Var<T> a, Var<T> b);
template <typename T>
Var<T> scale(Var<T> x, T s);
template <typename T>
Var<T> add_scalar(Var<T> x, T s);
template <typename T>
Var<T> scale_param(Var<T> x, Var<T> s);
template <typename T>
Var<T> gelu(Var<T> x);
template <typename T>
Var<T> softplus(Var<T> x);
template <typename T>
Var<T> exp_elem(Var<T> x);
template <typename T>
Var<T> soft_shrink(Var<T> x, Var<T> theta);
template <typename T>
Var<T> dwconv3d_causal(Var<T> x, Var<T> k, Var<T> b);
template <typename T>
Var<T> concat_lastdim(Var<T> a, Var<T> b);
template <typename T>
Var<T> slice_lastdim(Var<T> x, std::int64_t off, std::int64_t len);
template <typename T>
Var<T> concat_axis0(Var<T> a, Var<T> b);
template <typename T>
Var<T> slice_axis0(Var<T> x, std::int64_t off, std::int64_t len);
template <typename T>
Var<T> sum_scalar(Var<T> x);
template <typename T>
Var<T> mean_scalar(Var<T> x);
template <typename T>
Var<T> mean_abs_scalar(Var<T> x);
template <typename T>
Var<T> layer_norm_lastdim(Var<T> x, Var<T> gamma, Var<T> beta, T eps);
template <typename T>
Var<T> gather_patches(Var<T> vol, int pt, int ph, int pw);
template <typename T>
Var<T> scatter_patches(Var<T> tok, int pt, int ph, int pw, int C);
template <typename T>
Var<T> reshape(Var<T> x, std::vector<std::int64_t> shape);

// Type helpers for code that is generic over Tensor<T> / Var<T>.
template <typename A>
struct scalar_of;
template <typename T>
struct scalar_of<Tensor<T>> {
  using type = T;
};
template <typename T>
struct scalar_of<Var<T>> {
  using type = T;
};
template <typename A>
using scalar_of_t = typename scalar_of<A>::type;

template <typename T>
inline const Tensor<T>& value_of(const Tensor<T>& t) {
  return t;
}
template <typename T>
inline const Tensor<T>& value_of(const Var<T>& v) {
  return v.value();
}

// Wraps a tensor as a non-differentiable value of the same array kind as
// `ref` (identity for tensors, tape constant for variables).
template <typename T>
inline Tensor<T> constant_like(const Tensor<T>&, Tensor<T> v) {
  return v;
}
template <typename T>
inline Var<T> constant_like(const Var<T>& ref, Tensor<T> v) {
  return ref.node()->tape->constant(std::move(v));
}

}  // namespace vvae::ad

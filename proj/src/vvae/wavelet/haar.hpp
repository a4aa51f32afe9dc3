#pragma once

#include "vvae/core/autodiff.hpp"
#include "vvae/core/tensor.hpp"

// Single-level orthonormal Haar transforms, channels-last. Each axis applies
// (a+b)/sqrt(2), (a-b)/sqrt(2), so the transform preserves the L2 norm and
// the synthesis operator is the exact adjoint of the analysis operator.
//
// Packed layouts keep subbands concatenated on the channel axis in a fixed
// order. 3D over [T,H,W,C] -> [T/2,H/2,W/2,8C] with subband s at channels
// [s*C,(s+1)*C), s indexed by filter bits (t,h,w), low=0: s=0 lll, then
// llh, lhl, lhh, hll, hlh, hhl, hhh. 2D over [H,W,C] -> [H/2,W/2,4C] with
// ll, lh, hl, hh (bits (h,w)).

namespace vvae {

template <typename T>
Tensor<T> dwt3_packed(const Tensor<T>& x);
template <typename T>
Tensor<T> idwt3_packed(const Tensor<T>& s);
template <typename T>
Tensor<T> dwt2_packed(const Tensor<T>& x);
template <typename T>
Tensor<T> idwt2_packed(const Tensor<T>& s);

// Low/high split views of the packed forms (low: first subband, high: the
// rest concatenated in packed order).
template <typename X>
struct Subbands {
  X low, high;
};

template <typename T>
Subbands<Tensor<T>> dwt3(const Tensor<T>& x);
template <typename T>
Tensor<T> idwt3(const Subbands<Tensor<T>>& s);
template <typename T>
Subbands<Tensor<T>> dwt2(const Tensor<T>& x);
template <typename T>
Tensor<T> idwt2(const Subbands<Tensor<T>>& s);

}  // namespace vvae

namespace vvae::ad {

template <typename T>
Var<T> dwt3_packed(Var<T> x);
template <typename T>
Var<T> idwt3_packed(Var<T> s);
template <typename T>
Var<T> dwt2_packed(Var<T> x);
template <typename T>
Var<T> idwt2_packed(Var<T> s);

}  // namespace vvae::ad

#pragma once

#include <cstdint>
#include <vector>

#include "vvae/core/tensor.hpp"

// Plain-tensor forward operations (no graph recording). The autodiff layer
// wraps these; model code is written against the shared op names so the
// same forward runs on tensors or on tape variables.

namespace vvae {

// y[..., o] = sum_i x[..., i] * w[i, o]
template <typename T>
Tensor<T> matmul_lastdim(const Tensor<T>& x, const Tensor<T>& w);

// y[..., a] = sum_b x[..., b] * w[a, b]  (w applied transposed)
template <typename T>
Tensor<T> matmul_lastdim_t(const Tensor<T>& x, const Tensor<T>& w);

// gw[i, o] = sum_rows x[..., i] * gy[..., o]
template <typename T>
Tensor<T> matmul_lastdim_tn(const Tensor<T>& x, const Tensor<T>& gy);

// b broadcast over all leading axes.
template <typename T>
Tensor<T> add_bias_lastdim(const Tensor<T>& x, const Tensor<T>& b);

// Column sums of gy over all leading axes (bias gradient).
template <typename T>
Tensor<T> sum_leading(const Tensor<T>& gy);

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> scale(const Tensor<T>& x, T s);
template <typename T>
Tensor<T> add_scalar(const Tensor<T>& x, T s);

template <typename T>
Tensor<T> gelu(const Tensor<T>& x);
template <typename T>
Tensor<T> gelu_backward(const Tensor<T>& x, const Tensor<T>& gy);

template <typename T>
Tensor<T> softplus(const Tensor<T>& x);
template <typename T>
Tensor<T> softplus_backward(const Tensor<T>& x, const Tensor<T>& gy);

template <typename T>
Tensor<T> exp_elem(const Tensor<T>& x);

// sgn(x) * max(|x| - theta, 0); theta must be >= 0.
template <typename T>
Tensor<T> soft_shrink(const Tensor<T>& x, T theta);

// Depthwise 3x3x3 convolution over x[T,H,W,C], zero-padded spatially,
// causal in time: out[t] sees x[t-2..t]. The two missing leading slices
// come from `cache` (shape [2,H,W,C]) when given, else they are zero.
// When `next_cache` is non-null it receives the two trailing input slices
// that a following chunk would need.
template <typename T>
Tensor<T> dwconv3d_causal(const Tensor<T>& x, const Tensor<T>& k,
                          const Tensor<T>& b, const Tensor<T>* cache = nullptr,
                          Tensor<T>* next_cache = nullptr);

template <typename T>
struct DwConvGrads {
  Tensor<T> gx, gk, gb;
};
// Zero temporal padding (training path never streams).
template <typename T>
DwConvGrads<T> dwconv3d_causal_backward(const Tensor<T>& x, const Tensor<T>& k,
                                        const Tensor<T>& gy);

template <typename T>
Tensor<T> concat_lastdim(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> slice_lastdim(const Tensor<T>& x, std::int64_t off, std::int64_t len);
template <typename T>
Tensor<T> concat_axis0(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> slice_axis0(const Tensor<T>& x, std::int64_t off, std::int64_t len);

// Scalar results keep shape {} (0-d, one element).
template <typename T>
Tensor<T> sum_scalar(const Tensor<T>& x);
template <typename T>
Tensor<T> mean_scalar(const Tensor<T>& x);
template <typename T>
Tensor<T> mean_abs_scalar(const Tensor<T>& x);

// Per-token normalization over the last axis with learnable scale/shift.
template <typename T>
Tensor<T> layer_norm_lastdim(const Tensor<T>& x, const Tensor<T>& gamma,
                             const Tensor<T>& beta, T eps);
template <typename T>
struct LayerNormGrads {
  Tensor<T> gx, ggamma, gbeta;
};
template <typename T>
LayerNormGrads<T> layer_norm_lastdim_backward(const Tensor<T>& x,
                                              const Tensor<T>& gamma,
                                              const Tensor<T>& gy, T eps);

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, std::vector<std::int64_t> shape) {
  return x.reshaped(std::move(shape));
}

// x scaled by a one-element tensor (learnable scalar).
template <typename T>
Tensor<T> scale_param(const Tensor<T>& x, const Tensor<T>& s);

// Overload taking the threshold as a one-element tensor.
template <typename T>
Tensor<T> soft_shrink(const Tensor<T>& x, const Tensor<T>& theta);

// vol[Tv,Hv,Wv,C] -> tokens [Tv/pt, Hv/ph, Wv/pw, C*pt*ph*pw].
// Patch vectors are flattened channel-slowest: index ((c*pt+dt)*ph+dh)*pw+dw.
template <typename T>
Tensor<T> gather_patches(const Tensor<T>& vol, int pt, int ph, int pw);

// Exact inverse of gather_patches; C is the volume channel count.
template <typename T>
Tensor<T> scatter_patches(const Tensor<T>& tok, int pt, int ph, int pw, int C);

template <typename T>
double max_abs_diff(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
double max_abs(const Tensor<T>& a);

template <typename U, typename T>
Tensor<U> cast(const Tensor<T>& x) {
  Tensor<U> out(x.shape());
  for (std::int64_t i = 0; i < x.numel(); ++i) out[i] = static_cast<U>(x[i]);
  return out;
}

template <typename T>
Tensor<T> fill_uniform(std::vector<std::int64_t> shape, T lo, T hi,
                       class Rng& rng);

}  // namespace vvae

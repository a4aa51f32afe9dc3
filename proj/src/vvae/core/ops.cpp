#include "vvae/core/ops.hpp"

#include <cmath>
#include <cstring>

#include "vvae/core/parallel.hpp"
#include "vvae/core/rng.hpp"
#include "vvae/kernels/kernels.hpp"

namespace vvae {

namespace {

template <typename T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b,
                        const char* op) {
  if (!same_shape(a.shape(), b.shape()))
    throw shape_error(std::string(op) + ": shape mismatch " +
                      shape_str(a.shape()) + " vs " + shape_str(b.shape()));
}

constexpr std::size_t kGrain = 4096;

}  // namespace

template <typename T>
Tensor<T> matmul_lastdim(const Tensor<T>& x, const Tensor<T>& w) {
  if (w.ndim() != 2)
    throw shape_error("matmul_lastdim: weight must be 2-d, got " +
                      shape_str(w.shape()));
  if (x.ndim() < 1 || x.shape().back() != w.extent(0))
    throw shape_error("matmul_lastdim: inner extent mismatch " +
                      shape_str(x.shape()) + " vs " + shape_str(w.shape()));
  const std::int64_t in = w.extent(0), out = w.extent(1);
  const std::int64_t rows = rows_before_last(x);
  std::vector<std::int64_t> os = x.shape();
  os.back() = out;
  Tensor<T> y(std::move(os));
  const auto& K = kern::ops<T>();
  const std::size_t grain =
      in * out > 0 ? std::max<std::size_t>(1, 65536 / std::size_t(in)) : 1;
  parallel_for(std::size_t(rows), grain, [&](std::size_t b, std::size_t e) {
    K.matmul(x.data() + b * in, w.data(), y.data() + b * out, e - b,
             std::size_t(in), std::size_t(out));
  });
  return y;
}

template <typename T>
Tensor<T> matmul_lastdim_t(const Tensor<T>& x, const Tensor<T>& w) {
  if (w.ndim() != 2 || x.ndim() < 1 || x.shape().back() != w.extent(1))
    throw shape_error("matmul_lastdim_t: extent mismatch " +
                      shape_str(x.shape()) + " vs " + shape_str(w.shape()));
  const std::int64_t in = w.extent(0), out = w.extent(1);
  const std::int64_t rows = rows_before_last(x);
  std::vector<std::int64_t> os = x.shape();
  os.back() = in;
  Tensor<T> y(std::move(os));
  const auto& K = kern::ops<T>();
  const std::size_t grain =
      in * out > 0 ? std::max<std::size_t>(1, 65536 / std::size_t(out)) : 1;
  parallel_for(std::size_t(rows), grain, [&](std::size_t b, std::size_t e) {
    K.matmul_bt(x.data() + b * out, w.data(), y.data() + b * in, e - b,
                std::size_t(in), std::size_t(out));
  });
  return y;
}

template <typename T>
Tensor<T> matmul_lastdim_tn(const Tensor<T>& x, const Tensor<T>& gy) {
  const std::int64_t in = x.shape().back(), out = gy.shape().back();
  const std::int64_t rows = rows_before_last(x);
  if (rows != rows_before_last(gy))
    throw shape_error("matmul_lastdim_tn: row count mismatch");
  Tensor<T> gw({in, out});
  const auto& K = kern::ops<T>();
  // Fixed 8-way row split so the reduction order does not depend on the
  // configured thread count.
  const std::int64_t chunks = rows >= 64 ? 8 : 1;
  if (chunks == 1) {
    K.matmul_tn_acc(x.data(), gy.data(), gw.data(), std::size_t(rows),
                    std::size_t(in), std::size_t(out));
    return gw;
  }
  Tensor<T> partial({chunks, in, out});
  const std::int64_t per = (rows + chunks - 1) / chunks;
  parallel_for(std::size_t(chunks), 1, [&](std::size_t cb, std::size_t ce) {
    for (std::size_t c = cb; c < ce; ++c) {
      const std::int64_t r0 = std::int64_t(c) * per;
      const std::int64_t r1 = std::min(rows, r0 + per);
      if (r0 >= r1) continue;
      K.matmul_tn_acc(x.data() + r0 * in, gy.data() + r0 * out,
                      partial.data() + std::int64_t(c) * in * out,
                      std::size_t(r1 - r0), std::size_t(in),
                      std::size_t(out));
    }
  });
  for (std::int64_t c = 0; c < chunks; ++c)
    K.add(gw.data(), gw.data(), partial.data() + c * in * out,
          std::size_t(in * out));
  return gw;
}

template <typename T>
Tensor<T> sum_leading(const Tensor<T>& gy) {
  const std::int64_t c = gy.shape().back();
  Tensor<T> gb({c});
  const auto& K = kern::ops<T>();
  const std::int64_t rows = rows_before_last(gy);
  for (std::int64_t r = 0; r < rows; ++r)
    K.axpy(gb.data(), T(1), gy.data() + r * c, std::size_t(c));
  return gb;
}

template <typename T>
Tensor<T> add_bias_lastdim(const Tensor<T>& x, const Tensor<T>& b) {
  if (b.ndim() != 1 || x.ndim() < 1 || b.extent(0) != x.shape().back())
    throw shape_error("add_bias_lastdim: bias " + shape_str(b.shape()) +
                      " does not match " + shape_str(x.shape()));
  const std::int64_t c = b.extent(0), rows = rows_before_last(x);
  Tensor<T> y(x.shape());
  const auto& K = kern::ops<T>();
  parallel_for(std::size_t(rows), std::max<std::size_t>(1, kGrain / c),
               [&](std::size_t r0, std::size_t r1) {
                 for (std::size_t r = r0; r < r1; ++r)
                   K.add(y.data() + r * c, x.data() + r * c, b.data(),
                         std::size_t(c));
               });
  return y;
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "add");
  Tensor<T> y(a.shape());
  kern::ops<T>().add(y.data(), a.data(), b.data(), std::size_t(a.numel()));
  return y;
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "sub");
  Tensor<T> y(a.shape());
  kern::ops<T>().sub(y.data(), a.data(), b.data(), std::size_t(a.numel()));
  return y;
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "mul");
  Tensor<T> y(a.shape());
  kern::ops<T>().mul(y.data(), a.data(), b.data(), std::size_t(a.numel()));
  return y;
}

template <typename T>
Tensor<T> scale(const Tensor<T>& x, T s) {
  Tensor<T> y(x.shape());
  kern::ops<T>().scale(y.data(), x.data(), s, std::size_t(x.numel()));
  return y;
}

template <typename T>
Tensor<T> add_scalar(const Tensor<T>& x, T s) {
  Tensor<T> y(x.shape());
  for (std::int64_t i = 0; i < x.numel(); ++i) y[i] = x[i] + s;
  return y;
}

namespace {
template <typename T>
inline T gelu_one(T x) {
  return T(0.5) * x * (T(1) + std::erf(x * T(0.70710678118654752440)));
}
template <typename T>
inline T gelu_grad_one(T x) {
  const T cdf = T(0.5) * (T(1) + std::erf(x * T(0.70710678118654752440)));
  const T pdf = T(0.39894228040143267794) * std::exp(T(-0.5) * x * x);
  return cdf + x * pdf;
}
}  // namespace

template <typename T>
Tensor<T> gelu(const Tensor<T>& x) {
  Tensor<T> y(x.shape());
  parallel_for(std::size_t(x.numel()), kGrain,
               [&](std::size_t b, std::size_t e) {
                 for (std::size_t i = b; i < e; ++i) y[i] = gelu_one(x[i]);
               });
  return y;
}

template <typename T>
Tensor<T> gelu_backward(const Tensor<T>& x, const Tensor<T>& gy) {
  require_same_shape(x, gy, "gelu_backward");
  Tensor<T> g(x.shape());
  parallel_for(std::size_t(x.numel()), kGrain,
               [&](std::size_t b, std::size_t e) {
                 for (std::size_t i = b; i < e; ++i)
                   g[i] = gy[i] * gelu_grad_one(x[i]);
               });
  return g;
}

template <typename T>
Tensor<T> softplus(const Tensor<T>& x) {
  Tensor<T> y(x.shape());
  for (std::int64_t i = 0; i < x.numel(); ++i)
    y[i] = x[i] > T(20) ? x[i] : std::log1p(std::exp(x[i]));
  return y;
}

template <typename T>
Tensor<T> softplus_backward(const Tensor<T>& x, const Tensor<T>& gy) {
  require_same_shape(x, gy, "softplus_backward");
  Tensor<T> g(x.shape());
  for (std::int64_t i = 0; i < x.numel(); ++i)
    g[i] = gy[i] / (T(1) + std::exp(-x[i]));
  return g;
}

template <typename T>
Tensor<T> exp_elem(const Tensor<T>& x) {
  Tensor<T> y(x.shape());
  for (std::int64_t i = 0; i < x.numel(); ++i) y[i] = std::exp(x[i]);
  return y;
}

template <typename T>
Tensor<T> soft_shrink(const Tensor<T>& x, T theta) {
  if (!(theta >= T(0)))
    throw input_error("soft_shrink: negative threshold");
  Tensor<T> y(x.shape());
  kern::ops<T>().soft_shrink(y.data(), x.data(), theta,
                             std::size_t(x.numel()));
  return y;
}

template <typename T>
Tensor<T> dwconv3d_causal(const Tensor<T>& x, const Tensor<T>& k,
                          const Tensor<T>& b, const Tensor<T>* cache,
                          Tensor<T>* next_cache) {
  if (x.ndim() != 4) throw shape_error("dwconv3d: input must be [T,H,W,C]");
  const std::int64_t Tn = x.extent(0), H = x.extent(1), W = x.extent(2),
                     C = x.extent(3);
  if (!same_shape(k.shape(), {3, 3, 3, C}))
    throw shape_error("dwconv3d: kernel must be [3,3,3," + std::to_string(C) +
                      "], got " + shape_str(k.shape()));
  if (!same_shape(b.shape(), {C}))
    throw shape_error("dwconv3d: bias must be [C]");
  if (cache && !same_shape(cache->shape(), {2, H, W, C}))
    throw input_error("dwconv3d: cache shape " + shape_str(cache->shape()) +
                      " does not match expected " +
                      shape_str({2, H, W, C}));

  Tensor<T> y(x.shape());
  const auto& K = kern::ops<T>();
  const std::int64_t plane = H * W * C, row = W * C;

  // Source plane for time index t in [-2, Tn): x, the cache, or zero.
  auto src_plane = [&](std::int64_t t) -> const T* {
    if (t >= 0 && t < Tn) return x.data() + t * plane;
    if (t < 0 && cache) return cache->data() + (t + 2) * plane;
    return nullptr;
  };

  parallel_for(std::size_t(Tn * H), 4, [&](std::size_t rb, std::size_t re) {
    for (std::size_t r = rb; r < re; ++r) {
      const std::int64_t t = std::int64_t(r) / H, h = std::int64_t(r) % H;
      T* yrow = y.data() + t * plane + h * row;
      for (std::int64_t w = 0; w < W; ++w)
        std::memcpy(yrow + w * C, b.data(), sizeof(T) * std::size_t(C));
      for (std::int64_t dt = 0; dt < 3; ++dt) {
        const T* splane = src_plane(t - 2 + dt);
        if (!splane) continue;
        for (std::int64_t dh = 0; dh < 3; ++dh) {
          const std::int64_t sh = h - 1 + dh;
          if (sh < 0 || sh >= H) continue;
          const T* srow = splane + sh * row;
          for (std::int64_t dw = 0; dw < 3; ++dw) {
            const T* ktap = k.data() + ((dt * 3 + dh) * 3 + dw) * C;
            const std::int64_t w0 = std::max<std::int64_t>(0, 1 - dw);
            const std::int64_t w1 = std::min<std::int64_t>(W, W + 1 - dw);
            for (std::int64_t w = w0; w < w1; ++w)
              K.fmadd(yrow + w * C, ktap, srow + (w - 1 + dw) * C,
                      std::size_t(C));
          }
        }
      }
    }
  });

  if (next_cache) {
    Tensor<T> nc({2, H, W, C});
    for (std::int64_t s = 0; s < 2; ++s) {
      const std::int64_t t = Tn - 2 + s;
      const T* p = src_plane(t);
      if (p)
        std::memcpy(nc.data() + s * plane, p, sizeof(T) * std::size_t(plane));
    }
    *next_cache = std::move(nc);
  }
  return y;
}

template <typename T>
DwConvGrads<T> dwconv3d_causal_backward(const Tensor<T>& x, const Tensor<T>& k,
                                        const Tensor<T>& gy) {
  const std::int64_t Tn = x.extent(0), H = x.extent(1), W = x.extent(2),
                     C = x.extent(3);
  require_same_shape(x, gy, "dwconv3d_backward");
  DwConvGrads<T> g{Tensor<T>(x.shape()), Tensor<T>(k.shape()),
                   Tensor<T>({C})};
  const auto& K = kern::ops<T>();
  const std::int64_t plane = H * W * C, row = W * C;

  // gx gather: gx[tau] = sum_dt k[dt] * gy[tau + 2 - dt], spatially mirrored.
  parallel_for(std::size_t(Tn * H), 4, [&](std::size_t rb, std::size_t re) {
    for (std::size_t r = rb; r < re; ++r) {
      const std::int64_t t = std::int64_t(r) / H, h = std::int64_t(r) % H;
      T* gxrow = g.gx.data() + t * plane + h * row;
      for (std::int64_t dt = 0; dt < 3; ++dt) {
        const std::int64_t ot = t + 2 - dt;
        if (ot < 0 || ot >= Tn) continue;
        for (std::int64_t dh = 0; dh < 3; ++dh) {
          const std::int64_t oh = h + 1 - dh;
          if (oh < 0 || oh >= H) continue;
          const T* gyrow = gy.data() + ot * plane + oh * row;
          for (std::int64_t dw = 0; dw < 3; ++dw) {
            const T* ktap = k.data() + ((dt * 3 + dh) * 3 + dw) * C;
            const std::int64_t w0 = std::max<std::int64_t>(0, dw - 1);
            const std::int64_t w1 = std::min<std::int64_t>(W, W + dw - 1);
            for (std::int64_t w = w0; w < w1; ++w)
              K.fmadd(gxrow + w * C, ktap, gyrow + (w + 1 - dw) * C,
                      std::size_t(C));
          }
        }
      }
    }
  });

  // gk: one [C] accumulator per tap, sites in fixed order.
  parallel_for(27, 1, [&](std::size_t tb, std::size_t te) {
    for (std::size_t tap = tb; tap < te; ++tap) {
      const std::int64_t dt = tap / 9, dh = (tap / 3) % 3, dw = tap % 3;
      T* gk = g.gk.data() + std::int64_t(tap) * C;
      for (std::int64_t t = 0; t < Tn; ++t) {
        const std::int64_t st = t - 2 + dt;
        if (st < 0 || st >= Tn) continue;
        for (std::int64_t h = 0; h < H; ++h) {
          const std::int64_t sh = h - 1 + dh;
          if (sh < 0 || sh >= H) continue;
          const T* gyrow = gy.data() + t * plane + h * row;
          const T* xrow = x.data() + st * plane + sh * row;
          const std::int64_t w0 = std::max<std::int64_t>(0, 1 - dw);
          const std::int64_t w1 = std::min<std::int64_t>(W, W + 1 - dw);
          for (std::int64_t w = w0; w < w1; ++w)
            K.fmadd(gk, gyrow + w * C, xrow + (w - 1 + dw) * C,
                    std::size_t(C));
        }
      }
    }
  });

  for (std::int64_t s = 0; s < Tn * H * W; ++s)
    K.axpy(g.gb.data(), T(1), gy.data() + s * C, std::size_t(C));
  return g;
}

template <typename T>
Tensor<T> concat_lastdim(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.ndim() != b.ndim() || a.ndim() < 1)
    throw shape_error("concat_lastdim: rank mismatch");
  for (int i = 0; i + 1 < a.ndim(); ++i)
    if (a.extent(i) != b.extent(i))
      throw shape_error("concat_lastdim: leading extents differ");
  const std::int64_t ca = a.shape().back(), cb = b.shape().back();
  std::vector<std::int64_t> os = a.shape();
  os.back() = ca + cb;
  Tensor<T> y(std::move(os));
  const std::int64_t rows = rows_before_last(a);
  for (std::int64_t r = 0; r < rows; ++r) {
    std::memcpy(y.data() + r * (ca + cb), a.data() + r * ca,
                sizeof(T) * std::size_t(ca));
    std::memcpy(y.data() + r * (ca + cb) + ca, b.data() + r * cb,
                sizeof(T) * std::size_t(cb));
  }
  return y;
}

template <typename T>
Tensor<T> slice_lastdim(const Tensor<T>& x, std::int64_t off,
                        std::int64_t len) {
  const std::int64_t c = x.shape().back();
  if (off < 0 || len < 0 || off + len > c)
    throw shape_error("slice_lastdim: bounds");
  std::vector<std::int64_t> os = x.shape();
  os.back() = len;
  Tensor<T> y(std::move(os));
  const std::int64_t rows = rows_before_last(x);
  for (std::int64_t r = 0; r < rows; ++r)
    std::memcpy(y.data() + r * len, x.data() + r * c + off,
                sizeof(T) * std::size_t(len));
  return y;
}

template <typename T>
Tensor<T> concat_axis0(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.ndim() != b.ndim() || a.ndim() < 1)
    throw shape_error("concat_axis0: rank mismatch");
  for (int i = 1; i < a.ndim(); ++i)
    if (a.extent(i) != b.extent(i))
      throw shape_error("concat_axis0: trailing extents differ");
  std::vector<std::int64_t> os = a.shape();
  os[0] = a.extent(0) + b.extent(0);
  Tensor<T> y(std::move(os));
  std::memcpy(y.data(), a.data(), sizeof(T) * std::size_t(a.numel()));
  std::memcpy(y.data() + a.numel(), b.data(), sizeof(T) * std::size_t(b.numel()));
  return y;
}

template <typename T>
Tensor<T> slice_axis0(const Tensor<T>& x, std::int64_t off, std::int64_t len) {
  if (x.ndim() < 1 || off < 0 || len < 0 || off + len > x.extent(0))
    throw shape_error("slice_axis0: bounds");
  std::vector<std::int64_t> os = x.shape();
  os[0] = len;
  Tensor<T> y(std::move(os));
  const std::int64_t stride = x.extent(0) ? x.numel() / x.extent(0) : 0;
  std::memcpy(y.data(), x.data() + off * stride,
              sizeof(T) * std::size_t(len * stride));
  return y;
}

template <typename T>
Tensor<T> sum_scalar(const Tensor<T>& x) {
  Tensor<T> y(std::vector<std::int64_t>{});
  y[0] = static_cast<T>(kern::ops<T>().sum(x.data(), std::size_t(x.numel())));
  return y;
}

template <typename T>
Tensor<T> mean_scalar(const Tensor<T>& x) {
  if (x.numel() == 0) throw shape_error("mean of empty tensor");
  Tensor<T> y(std::vector<std::int64_t>{});
  y[0] = static_cast<T>(kern::ops<T>().sum(x.data(), std::size_t(x.numel())) /
                        double(x.numel()));
  return y;
}

template <typename T>
Tensor<T> mean_abs_scalar(const Tensor<T>& x) {
  if (x.numel() == 0) throw shape_error("mean of empty tensor");
  Tensor<T> y(std::vector<std::int64_t>{});
  y[0] = static_cast<T>(
      kern::ops<T>().sum_abs(x.data(), std::size_t(x.numel())) /
      double(x.numel()));
  return y;
}

template <typename T>
Tensor<T> layer_norm_lastdim(const Tensor<T>& x, const Tensor<T>& gamma,
                             const Tensor<T>& beta, T eps) {
  const std::int64_t c = x.shape().back();
  if (!same_shape(gamma.shape(), {c}) || !same_shape(beta.shape(), {c}))
    throw shape_error("layer_norm: scale/shift must be [C]");
  const std::int64_t rows = rows_before_last(x);
  Tensor<T> y(x.shape());
  for (std::int64_t r = 0; r < rows; ++r) {
    const T* xr = x.data() + r * c;
    T* yr = y.data() + r * c;
    double mu = 0.0;
    for (std::int64_t i = 0; i < c; ++i) mu += double(xr[i]);
    mu /= double(c);
    double var = 0.0;
    for (std::int64_t i = 0; i < c; ++i) {
      const double d = double(xr[i]) - mu;
      var += d * d;
    }
    var /= double(c);
    const T inv = T(1) / std::sqrt(T(var) + eps);
    for (std::int64_t i = 0; i < c; ++i)
      yr[i] = gamma[i] * ((xr[i] - T(mu)) * inv) + beta[i];
  }
  return y;
}

template <typename T>
LayerNormGrads<T> layer_norm_lastdim_backward(const Tensor<T>& x,
                                              const Tensor<T>& gamma,
                                              const Tensor<T>& gy, T eps) {
  const std::int64_t c = x.shape().back();
  const std::int64_t rows = rows_before_last(x);
  LayerNormGrads<T> g{Tensor<T>(x.shape()), Tensor<T>({c}), Tensor<T>({c})};
  for (std::int64_t r = 0; r < rows; ++r) {
    const T* xr = x.data() + r * c;
    const T* gyr = gy.data() + r * c;
    T* gxr = g.gx.data() + r * c;
    double mu = 0.0;
    for (std::int64_t i = 0; i < c; ++i) mu += double(xr[i]);
    mu /= double(c);
    double var = 0.0;
    for (std::int64_t i = 0; i < c; ++i) {
      const double d = double(xr[i]) - mu;
      var += d * d;
    }
    var /= double(c);
    const double inv = 1.0 / std::sqrt(var + double(eps));
    double m1 = 0.0, m2 = 0.0;  // mean(gyh), mean(gyh * xhat)
    for (std::int64_t i = 0; i < c; ++i) {
      const double xh = (double(xr[i]) - mu) * inv;
      const double gh = double(gyr[i]) * double(gamma[i]);
      m1 += gh;
      m2 += gh * xh;
      g.ggamma[i] += T(double(gyr[i]) * xh);
      g.gbeta[i] += gyr[i];
    }
    m1 /= double(c);
    m2 /= double(c);
    for (std::int64_t i = 0; i < c; ++i) {
      const double xh = (double(xr[i]) - mu) * inv;
      const double gh = double(gyr[i]) * double(gamma[i]);
      gxr[i] = T((gh - m1 - xh * m2) * inv);
    }
  }
  return g;
}

template <typename T>
Tensor<T> scale_param(const Tensor<T>& x, const Tensor<T>& s) {
  if (s.numel() != 1) throw shape_error("scale_param: scalar expected");
  return scale(x, s[0]);
}

template <typename T>
Tensor<T> soft_shrink(const Tensor<T>& x, const Tensor<T>& theta) {
  if (theta.numel() != 1) throw shape_error("soft_shrink: scalar expected");
  return soft_shrink(x, theta[0]);
}

template <typename T>
Tensor<T> gather_patches(const Tensor<T>& vol, int pt, int ph, int pw) {
  if (vol.ndim() != 4) throw shape_error("gather_patches: [T,H,W,C] expected");
  const std::int64_t Tv = vol.extent(0), Hv = vol.extent(1), Wv = vol.extent(2),
                     C = vol.extent(3);
  if (Tv % pt || Hv % ph || Wv % pw)
    throw shape_error("gather_patches: extents " + shape_str(vol.shape()) +
                      " not divisible by patch " + std::to_string(pt) + "x" +
                      std::to_string(ph) + "x" + std::to_string(pw));
  const std::int64_t Tt = Tv / pt, Ht = Hv / ph, Wt = Wv / pw;
  const std::int64_t vecdim = C * pt * ph * pw;
  Tensor<T> tok({Tt, Ht, Wt, vecdim});
  parallel_for(std::size_t(Tt * Ht), 1, [&](std::size_t rb, std::size_t re) {
    for (std::size_t r = rb; r < re; ++r) {
      const std::int64_t tt = std::int64_t(r) / Ht, th = std::int64_t(r) % Ht;
      for (std::int64_t tw = 0; tw < Wt; ++tw) {
        T* v = tok.data() + ((tt * Ht + th) * Wt + tw) * vecdim;
        for (std::int64_t c = 0; c < C; ++c)
          for (std::int64_t dt = 0; dt < pt; ++dt)
            for (std::int64_t dh = 0; dh < ph; ++dh)
              for (std::int64_t dw = 0; dw < pw; ++dw)
                v[((c * pt + dt) * ph + dh) * pw + dw] =
                    vol[(((tt * pt + dt) * Hv + th * ph + dh) * Wv + tw * pw +
                         dw) *
                            C +
                        c];
      }
    }
  });
  return tok;
}

template <typename T>
Tensor<T> scatter_patches(const Tensor<T>& tok, int pt, int ph, int pw,
                          int C) {
  if (tok.ndim() != 4) throw shape_error("scatter_patches: 4-d expected");
  const std::int64_t Tt = tok.extent(0), Ht = tok.extent(1),
                     Wt = tok.extent(2), vecdim = tok.extent(3);
  if (vecdim != std::int64_t(C) * pt * ph * pw)
    throw shape_error("scatter_patches: vector dim mismatch");
  const std::int64_t Tv = Tt * pt, Hv = Ht * ph, Wv = Wt * pw;
  Tensor<T> vol({Tv, Hv, Wv, C});
  parallel_for(std::size_t(Tt * Ht), 1, [&](std::size_t rb, std::size_t re) {
    for (std::size_t r = rb; r < re; ++r) {
      const std::int64_t tt = std::int64_t(r) / Ht, th = std::int64_t(r) % Ht;
      for (std::int64_t tw = 0; tw < Wt; ++tw) {
        const T* v = tok.data() + ((tt * Ht + th) * Wt + tw) * vecdim;
        for (std::int64_t c = 0; c < C; ++c)
          for (std::int64_t dt = 0; dt < pt; ++dt)
            for (std::int64_t dh = 0; dh < ph; ++dh)
              for (std::int64_t dw = 0; dw < pw; ++dw)
                vol[(((tt * pt + dt) * Hv + th * ph + dh) * Wv + tw * pw +
                     dw) *
                        C +
                    c] = v[((c * pt + dt) * ph + dh) * pw + dw];
      }
    }
  });
  return vol;
}

template <typename T>
double max_abs_diff(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::int64_t i = 0; i < a.numel(); ++i)
    m = std::max(m, std::fabs(double(a[i]) - double(b[i])));
  return m;
}

template <typename T>
double max_abs(const Tensor<T>& a) {
  double m = 0.0;
  for (std::int64_t i = 0; i < a.numel(); ++i)
    m = std::max(m, std::fabs(double(a[i])));
  return m;
}

template <typename T>
Tensor<T> fill_uniform(std::vector<std::int64_t> shape, T lo, T hi, Rng& rng) {
  Tensor<T> y(std::move(shape));
  for (std::int64_t i = 0; i < y.numel(); ++i)
    y[i] = static_cast<T>(rng.uniform(double(lo), double(hi)));
  return y;
}

#define VVAE_INSTANTIATE(T)                                                   \
  template Tensor<T> matmul_lastdim<T>(const Tensor<T>&, const Tensor<T>&);  \
  template Tensor<T> matmul_lastdim_t<T>(const Tensor<T>&, const Tensor<T>&);\
  template Tensor<T> matmul_lastdim_tn<T>(const Tensor<T>&, const Tensor<T>&);\
  template Tensor<T> sum_leading<T>(const Tensor<T>&);                       \
  template Tensor<T> scale_param<T>(const Tensor<T>&, const Tensor<T>&);     \
  template Tensor<T> soft_shrink<T>(const Tensor<T>&, const Tensor<T>&);     \
  template Tensor<T> gather_patches<T>(const Tensor<T>&, int, int, int);     \
  template Tensor<T> scatter_patches<T>(const Tensor<T>&, int, int, int, int);\
  template Tensor<T> add_bias_lastdim<T>(const Tensor<T>&, const Tensor<T>&);\
  template Tensor<T> add<T>(const Tensor<T>&, const Tensor<T>&);             \
  template Tensor<T> sub<T>(const Tensor<T>&, const Tensor<T>&);             \
  template Tensor<T> mul<T>(const Tensor<T>&, const Tensor<T>&);             \
  template Tensor<T> scale<T>(const Tensor<T>&, T);                          \
  template Tensor<T> add_scalar<T>(const Tensor<T>&, T);                     \
  template Tensor<T> gelu<T>(const Tensor<T>&);                              \
  template Tensor<T> gelu_backward<T>(const Tensor<T>&, const Tensor<T>&);   \
  template Tensor<T> softplus<T>(const Tensor<T>&);                          \
  template Tensor<T> softplus_backward<T>(const Tensor<T>&, const Tensor<T>&);\
  template Tensor<T> exp_elem<T>(const Tensor<T>&);                          \
  template Tensor<T> soft_shrink<T>(const Tensor<T>&, T);                    \
  template Tensor<T> dwconv3d_causal<T>(const Tensor<T>&, const Tensor<T>&,  \
                                        const Tensor<T>&, const Tensor<T>*,  \
                                        Tensor<T>*);                         \
  template DwConvGrads<T> dwconv3d_causal_backward<T>(                       \
      const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);                 \
  template Tensor<T> concat_lastdim<T>(const Tensor<T>&, const Tensor<T>&);  \
  template Tensor<T> slice_lastdim<T>(const Tensor<T>&, std::int64_t,        \
                                      std::int64_t);                         \
  template Tensor<T> concat_axis0<T>(const Tensor<T>&, const Tensor<T>&);    \
  template Tensor<T> slice_axis0<T>(const Tensor<T>&, std::int64_t,          \
                                    std::int64_t);                           \
  template Tensor<T> sum_scalar<T>(const Tensor<T>&);                        \
  template Tensor<T> mean_scalar<T>(const Tensor<T>&);                       \
  template Tensor<T> mean_abs_scalar<T>(const Tensor<T>&);                   \
  template Tensor<T> layer_norm_lastdim<T>(const Tensor<T>&, const Tensor<T>&,\
                                           const Tensor<T>&, T);             \
  template LayerNormGrads<T> layer_norm_lastdim_backward<T>(                 \
      const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, T);              \
  template double max_abs_diff<T>(const Tensor<T>&, const Tensor<T>&);       \
  template double max_abs<T>(const Tensor<T>&);                              \
  template Tensor<T> fill_uniform<T>(std::vector<std::int64_t>, T, T, Rng&);

VVAE_INSTANTIATE(float)
VVAE_INSTANTIATE(double)
#undef VVAE_INSTANTIATE

}  // namespace vvae

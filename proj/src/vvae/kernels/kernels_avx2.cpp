#if VVAE_HAVE_AVX2

#include <immintrin.h>

#include <cmath>
#include <cstddef>

#include "vvae/kernels/kernels.hpp"

// AVX2+FMA variants. This translation unit is the only one compiled with
// -mavx2 -mfma; it must not be entered unless cpu_has_avx2() is true.

namespace vvae::kern::avx2 {

namespace {

template <typename T>
struct V;

template <>
struct V<float> {
  using reg = __m256;
  static constexpr std::size_t width = 8;
  static reg load(const float* p) { return _mm256_loadu_ps(p); }
  static void store(float* p, reg v) { _mm256_storeu_ps(p, v); }
  static reg set1(float v) { return _mm256_set1_ps(v); }
  static reg zero() { return _mm256_setzero_ps(); }
  static reg add(reg a, reg b) { return _mm256_add_ps(a, b); }
  static reg sub(reg a, reg b) { return _mm256_sub_ps(a, b); }
  static reg mul(reg a, reg b) { return _mm256_mul_ps(a, b); }
  static reg fmadd(reg a, reg b, reg c) { return _mm256_fmadd_ps(a, b, c); }
  static reg max(reg a, reg b) { return _mm256_max_ps(a, b); }
  static reg abs(reg a) {
    return _mm256_andnot_ps(_mm256_set1_ps(-0.0f), a);
  }
  static reg sign_bits(reg a) {
    return _mm256_and_ps(_mm256_set1_ps(-0.0f), a);
  }
  static reg or_(reg a, reg b) { return _mm256_or_ps(a, b); }
};

template <>
struct V<double> {
  using reg = __m256d;
  static constexpr std::size_t width = 4;
  static reg load(const double* p) { return _mm256_loadu_pd(p); }
  static void store(double* p, reg v) { _mm256_storeu_pd(p, v); }
  static reg set1(double v) { return _mm256_set1_pd(v); }
  static reg zero() { return _mm256_setzero_pd(); }
  static reg add(reg a, reg b) { return _mm256_add_pd(a, b); }
  static reg sub(reg a, reg b) { return _mm256_sub_pd(a, b); }
  static reg mul(reg a, reg b) { return _mm256_mul_pd(a, b); }
  static reg fmadd(reg a, reg b, reg c) { return _mm256_fmadd_pd(a, b, c); }
  static reg max(reg a, reg b) { return _mm256_max_pd(a, b); }
  static reg abs(reg a) {
    return _mm256_andnot_pd(_mm256_set1_pd(-0.0), a);
  }
  static reg sign_bits(reg a) {
    return _mm256_and_pd(_mm256_set1_pd(-0.0), a);
  }
  static reg or_(reg a, reg b) { return _mm256_or_pd(a, b); }
};

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(lo) + _mm_cvtsd_f64(_mm_unpackhi_pd(lo, lo));
}

inline float hsum(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  lo = _mm_add_ps(lo, _mm_movehl_ps(lo, lo));
  return _mm_cvtss_f32(_mm_add_ss(lo, _mm_shuffle_ps(lo, lo, 1)));
}

// One block of RB rows of y = x @ w. Per output element the contraction
// runs i ascending with fused multiply-add, matching the scalar reference
// bit for bit.
template <typename T, int RB>
void mm_row_block(const T* x, const T* w, T* y, std::size_t in,
                  std::size_t out) {
  using v = V<T>;
  constexpr std::size_t W = v::width;
  std::size_t o = 0;
  for (; o + 2 * W <= out; o += 2 * W) {
    typename v::reg a0[RB], a1[RB];
    for (int r = 0; r < RB; ++r) {
      a0[r] = v::zero();
      a1[r] = v::zero();
    }
    for (std::size_t i = 0; i < in; ++i) {
      const typename v::reg w0 = v::load(w + i * out + o);
      const typename v::reg w1 = v::load(w + i * out + o + W);
      for (int r = 0; r < RB; ++r) {
        const typename v::reg xv = v::set1(x[r * in + i]);
        a0[r] = v::fmadd(xv, w0, a0[r]);
        a1[r] = v::fmadd(xv, w1, a1[r]);
      }
    }
    for (int r = 0; r < RB; ++r) {
      v::store(y + r * out + o, a0[r]);
      v::store(y + r * out + o + W, a1[r]);
    }
  }
  for (; o + W <= out; o += W) {
    typename v::reg a[RB];
    for (int r = 0; r < RB; ++r) a[r] = v::zero();
    for (std::size_t i = 0; i < in; ++i) {
      const typename v::reg w0 = v::load(w + i * out + o);
      for (int r = 0; r < RB; ++r)
        a[r] = v::fmadd(v::set1(x[r * in + i]), w0, a[r]);
    }
    for (int r = 0; r < RB; ++r) v::store(y + r * out + o, a[r]);
  }
  for (; o < out; ++o) {
    for (int r = 0; r < RB; ++r) {
      T acc = T(0);
      for (std::size_t i = 0; i < in; ++i)
        acc = std::fma(x[r * in + i], w[i * out + o], acc);
      y[r * out + o] = acc;
    }
  }
}

template <typename T>
void matmul(const T* x, const T* w, T* y, std::size_t rows, std::size_t in,
            std::size_t out) {
  std::size_t r = 0;
  for (; r + 6 <= rows; r += 6)
    mm_row_block<T, 6>(x + r * in, w, y + r * out, in, out);
  for (; r + 2 <= rows; r += 2)
    mm_row_block<T, 2>(x + r * in, w, y + r * out, in, out);
  for (; r < rows; ++r) mm_row_block<T, 1>(x + r * in, w, y + r * out, in, out);
}

template <typename T>
void matmul_bt(const T* gy, const T* w, T* gx, std::size_t rows,
               std::size_t in, std::size_t out) {
  using v = V<T>;
  constexpr std::size_t W = v::width;
  const std::size_t ov = out - out % W;
  for (std::size_t r = 0; r < rows; ++r) {
    const T* gyr = gy + r * out;
    T* gxr = gx + r * in;
    std::size_t i = 0;
    for (; i + 4 <= in; i += 4) {
      typename v::reg a0 = v::zero(), a1 = v::zero(), a2 = v::zero(),
                      a3 = v::zero();
      const T* w0 = w + i * out;
      for (std::size_t o = 0; o < ov; o += W) {
        const typename v::reg g = v::load(gyr + o);
        a0 = v::fmadd(g, v::load(w0 + o), a0);
        a1 = v::fmadd(g, v::load(w0 + out + o), a1);
        a2 = v::fmadd(g, v::load(w0 + 2 * out + o), a2);
        a3 = v::fmadd(g, v::load(w0 + 3 * out + o), a3);
      }
      T s0 = hsum(a0), s1 = hsum(a1), s2 = hsum(a2), s3 = hsum(a3);
      for (std::size_t o = ov; o < out; ++o) {
        s0 = std::fma(gyr[o], w0[o], s0);
        s1 = std::fma(gyr[o], w0[out + o], s1);
        s2 = std::fma(gyr[o], w0[2 * out + o], s2);
        s3 = std::fma(gyr[o], w0[3 * out + o], s3);
      }
      gxr[i] = s0;
      gxr[i + 1] = s1;
      gxr[i + 2] = s2;
      gxr[i + 3] = s3;
    }
    for (; i < in; ++i) {
      const T* wi = w + i * out;
      typename v::reg a = v::zero();
      for (std::size_t o = 0; o < ov; o += W)
        a = v::fmadd(v::load(gyr + o), v::load(wi + o), a);
      T s = hsum(a);
      for (std::size_t o = ov; o < out; ++o) s = std::fma(gyr[o], wi[o], s);
      gxr[i] = s;
    }
  }
}

template <typename T>
void matmul_tn_acc(const T* x, const T* gy, T* gw, std::size_t rows,
                   std::size_t in, std::size_t out) {
  using v = V<T>;
  constexpr std::size_t W = v::width;
  const std::size_t ov = out - out % W;
  for (std::size_t r = 0; r < rows; ++r) {
    const T* xr = x + r * in;
    const T* gyr = gy + r * out;
    for (std::size_t i = 0; i < in; ++i) {
      const T xv = xr[i];
      T* gwi = gw + i * out;
      const typename v::reg xb = v::set1(xv);
      for (std::size_t o = 0; o < ov; o += W)
        v::store(gwi + o, v::fmadd(xb, v::load(gyr + o), v::load(gwi + o)));
      for (std::size_t o = ov; o < out; ++o)
        gwi[o] = std::fma(xv, gyr[o], gwi[o]);
    }
  }
}

template <typename T>
void axpy(T* y, T a, const T* x, std::size_t n) {
  using v = V<T>;
  constexpr std::size_t W = v::width;
  const typename v::reg ab = v::set1(a);
  std::size_t i = 0;
  for (; i + W <= n; i += W)
    v::store(y + i, v::fmadd(ab, v::load(x + i), v::load(y + i)));
  for (; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

template <typename T>
void fmadd(T* y, const T* a, const T* b, std::size_t n) {
  using v = V<T>;
  constexpr std::size_t W = v::width;
  std::size_t i = 0;
  for (; i + W <= n; i += W)
    v::store(y + i, v::fmadd(v::load(a + i), v::load(b + i), v::load(y + i)));
  for (; i < n; ++i) y[i] = std::fma(a[i], b[i], y[i]);
}

template <typename T>
void add(T* y, const T* a, const T* b, std::size_t n) {
  using v = V<T>;
  constexpr std::size_t W = v::width;
  std::size_t i = 0;
  for (; i + W <= n; i += W)
    v::store(y + i, v::add(v::load(a + i), v::load(b + i)));
  for (; i < n; ++i) y[i] = a[i] + b[i];
}

template <typename T>
void sub(T* y, const T* a, const T* b, std::size_t n) {
  using v = V<T>;
  constexpr std::size_t W = v::width;
  std::size_t i = 0;
  for (; i + W <= n; i += W)
    v::store(y + i, v::sub(v::load(a + i), v::load(b + i)));
  for (; i < n; ++i) y[i] = a[i] - b[i];
}

template <typename T>
void mul(T* y, const T* a, const T* b, std::size_t n) {
  using v = V<T>;
  constexpr std::size_t W = v::width;
  std::size_t i = 0;
  for (; i + W <= n; i += W)
    v::store(y + i, v::mul(v::load(a + i), v::load(b + i)));
  for (; i < n; ++i) y[i] = a[i] * b[i];
}

template <typename T>
void scale(T* y, const T* a, T s, std::size_t n) {
  using v = V<T>;
  constexpr std::size_t W = v::width;
  const typename v::reg sb = v::set1(s);
  std::size_t i = 0;
  for (; i + W <= n; i += W) v::store(y + i, v::mul(v::load(a + i), sb));
  for (; i < n; ++i) y[i] = a[i] * s;
}

template <typename T>
void haar_pair(T* lo, T* hi, const T* a, const T* b, std::size_t n) {
  using v = V<T>;
  constexpr std::size_t W = v::width;
  const T s = T(1) / std::sqrt(T(2));
  const typename v::reg sb = v::set1(s);
  std::size_t i = 0;
  for (; i + W <= n; i += W) {
    const typename v::reg av = v::load(a + i), bv = v::load(b + i);
    v::store(lo + i, v::mul(v::add(av, bv), sb));
    v::store(hi + i, v::mul(v::sub(av, bv), sb));
  }
  for (; i < n; ++i) {
    lo[i] = (a[i] + b[i]) * s;
    hi[i] = (a[i] - b[i]) * s;
  }
}

template <typename T>
void haar_unpair(T* a, T* b, const T* lo, const T* hi, std::size_t n) {
  using v = V<T>;
  constexpr std::size_t W = v::width;
  const T s = T(1) / std::sqrt(T(2));
  const typename v::reg sb = v::set1(s);
  std::size_t i = 0;
  for (; i + W <= n; i += W) {
    const typename v::reg lv = v::load(lo + i), hv = v::load(hi + i);
    v::store(a + i, v::mul(v::add(lv, hv), sb));
    v::store(b + i, v::mul(v::sub(lv, hv), sb));
  }
  for (; i < n; ++i) {
    a[i] = (lo[i] + hi[i]) * s;
    b[i] = (lo[i] - hi[i]) * s;
  }
}

template <typename T>
void soft_shrink(T* y, const T* x, T theta, std::size_t n) {
  using v = V<T>;
  constexpr std::size_t W = v::width;
  const typename v::reg tb = v::set1(theta);
  std::size_t i = 0;
  for (; i + W <= n; i += W) {
    const typename v::reg xv = v::load(x + i);
    const typename v::reg m = v::max(v::sub(v::abs(xv), tb), v::zero());
    v::store(y + i, v::or_(m, v::sign_bits(xv)));
  }
  for (; i < n; ++i) {
    const T m = std::fabs(x[i]) - theta;
    y[i] = m > T(0) ? std::copysign(m, x[i]) : T(0);
  }
}

inline void acc_lanes(__m256d& acc, __m256 v) {
  acc = _mm256_add_pd(acc, _mm256_cvtps_pd(_mm256_castps256_ps128(v)));
  acc = _mm256_add_pd(acc, _mm256_cvtps_pd(_mm256_extractf128_ps(v, 1)));
}

inline void acc_lanes(__m256d& acc, __m256d v) { acc = _mm256_add_pd(acc, v); }

template <typename T, typename Pre>
double reduce(const T* x, std::size_t n, Pre pre, double (*tail)(const T*, std::size_t)) {
  using v = V<T>;
  constexpr std::size_t W = v::width;
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + W <= n; i += W) acc_lanes(acc, pre(v::load(x + i)));
  return hsum(acc) + tail(x + i, n - i);
}

template <typename T>
double sum(const T* x, std::size_t n) {
  using v = V<T>;
  return reduce<T>(
      x, n, [](typename v::reg r) { return r; },
      +[](const T* p, std::size_t m) {
        double a = 0.0;
        for (std::size_t i = 0; i < m; ++i) a += double(p[i]);
        return a;
      });
}

template <typename T>
double sum_abs(const T* x, std::size_t n) {
  using v = V<T>;
  return reduce<T>(
      x, n, [](typename v::reg r) { return v::abs(r); },
      +[](const T* p, std::size_t m) {
        double a = 0.0;
        for (std::size_t i = 0; i < m; ++i) a += std::fabs(double(p[i]));
        return a;
      });
}

inline void acc_lanes_sq(__m256d& acc, __m256 v) {
  const __m256d lo = _mm256_cvtps_pd(_mm256_castps256_ps128(v));
  const __m256d hi = _mm256_cvtps_pd(_mm256_extractf128_ps(v, 1));
  acc = _mm256_fmadd_pd(lo, lo, acc);
  acc = _mm256_fmadd_pd(hi, hi, acc);
}

inline void acc_lanes_sq(__m256d& acc, __m256d v) {
  acc = _mm256_fmadd_pd(v, v, acc);
}

// Squares after widening to double so precision matches the scalar path.
template <typename T>
double sum_sq(const T* x, std::size_t n) {
  using v = V<T>;
  constexpr std::size_t W = v::width;
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + W <= n; i += W) acc_lanes_sq(acc, v::load(x + i));
  double r = hsum(acc);
  for (; i < n; ++i) r += double(x[i]) * double(x[i]);
  return r;
}

}  // namespace

template <typename T>
const Table<T>& table() {
  static const Table<T> t = {
      &matmul<T>, &matmul_bt<T>, &matmul_tn_acc<T>, &axpy<T>, &fmadd<T>,
      &add<T>,    &sub<T>,       &mul<T>,           &scale<T>, &haar_pair<T>,
      &haar_unpair<T>, &soft_shrink<T>, &sum<T>, &sum_abs<T>, &sum_sq<T>,
  };
  return t;
}

template const Table<float>& table<float>();
template const Table<double>& table<double>();

}  // namespace vvae::kern::avx2

#endif  // VVAE_HAVE_AVX2

#pragma once

#include <cmath>
#include <cstddef>

// Scalar reference kernels. Contraction loops run with the index ascending
// and use std::fma wherever the vector variants fuse, so a single output
// element is computed by the same rounding sequence on every backend.

namespace vvae::kern::scalar_impl {

template <typename T>
void matmul(const T* x, const T* w, T* y, std::size_t rows, std::size_t in,
            std::size_t out) {
  for (std::size_t r = 0; r < rows; ++r) {
    T* yr = y + r * out;
    for (std::size_t o = 0; o < out; ++o) yr[o] = T(0);
    const T* xr = x + r * in;
    for (std::size_t i = 0; i < in; ++i) {
      const T xv = xr[i];
      const T* wi = w + i * out;
      for (std::size_t o = 0; o < out; ++o) yr[o] = std::fma(xv, wi[o], yr[o]);
    }
  }
}

template <typename T>
void matmul_bt(const T* gy, const T* w, T* gx, std::size_t rows,
               std::size_t in, std::size_t out) {
  for (std::size_t r = 0; r < rows; ++r) {
    const T* gyr = gy + r * out;
    T* gxr = gx + r * in;
    for (std::size_t i = 0; i < in; ++i) {
      const T* wi = w + i * out;
      T acc = T(0);
      for (std::size_t o = 0; o < out; ++o) acc = std::fma(gyr[o], wi[o], acc);
      gxr[i] = acc;
    }
  }
}

template <typename T>
void matmul_tn_acc(const T* x, const T* gy, T* gw, std::size_t rows,
                   std::size_t in, std::size_t out) {
  for (std::size_t r = 0; r < rows; ++r) {
    const T* xr = x + r * in;
    const T* gyr = gy + r * out;
    for (std::size_t i = 0; i < in; ++i) {
      const T xv = xr[i];
      T* gwi = gw + i * out;
      for (std::size_t o = 0; o < out; ++o)
        gwi[o] = std::fma(xv, gyr[o], gwi[o]);
    }
  }
}

template <typename T>
void axpy(T* y, T a, const T* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

template <typename T>
void fmadd(T* y, const T* a, const T* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::fma(a[i], b[i], y[i]);
}

template <typename T>
void add(T* y, const T* a, const T* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = a[i] + b[i];
}

template <typename T>
void sub(T* y, const T* a, const T* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = a[i] - b[i];
}

template <typename T>
void mul(T* y, const T* a, const T* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = a[i] * b[i];
}

template <typename T>
void scale(T* y, const T* a, T s, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = a[i] * s;
}

template <typename T>
void haar_pair(T* lo, T* hi, const T* a, const T* b, std::size_t n) {
  const T s = T(1) / std::sqrt(T(2));
  for (std::size_t i = 0; i < n; ++i) {
    lo[i] = (a[i] + b[i]) * s;
    hi[i] = (a[i] - b[i]) * s;
  }
}

template <typename T>
void haar_unpair(T* a, T* b, const T* lo, const T* hi, std::size_t n) {
  const T s = T(1) / std::sqrt(T(2));
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = (lo[i] + hi[i]) * s;
    b[i] = (lo[i] - hi[i]) * s;
  }
}

template <typename T>
void soft_shrink(T* y, const T* x, T theta, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const T m = std::fabs(x[i]) - theta;
    y[i] = m > T(0) ? (x[i] < T(0) ? -m : m) : T(0);
  }
}

template <typename T>
double sum(const T* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += double(x[i]);
  return acc;
}

template <typename T>
double sum_abs(const T* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::fabs(double(x[i]));
  return acc;
}

template <typename T>
double sum_sq(const T* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += double(x[i]) * double(x[i]);
  return acc;
}

}  // namespace vvae::kern::scalar_impl

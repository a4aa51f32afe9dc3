#pragma once

#include <cstddef>
#include <cstdint>

// Data-parallel inner loops. Every kernel has a scalar reference
// implementation and, on x86-64 with AVX2+FMA, a vector variant selected at
// runtime. Per-output accumulation order is fixed (contraction index
// ascending), so results for one output element do not depend on how calls
// are batched. Scalar and AVX2 variants of the fma-based kernels round
// identically (both fuse multiply-add); reductions may differ in the last
// ulps between backends.

namespace vvae::kern {

enum class Backend { scalar, avx2 };

bool cpu_has_avx2();
Backend active_backend();
// Test hook. Throws if the requested backend is unsupported on this CPU.
void force_backend(Backend b);
const char* backend_name(Backend b);

template <typename T>
struct Table {
  // y[rows,out] = x[rows,in] @ w[in,out]
  void (*matmul)(const T* x, const T* w, T* y, std::size_t rows,
                 std::size_t in, std::size_t out);
  // gx[rows,in] = gy[rows,out] @ w[in,out]^T
  void (*matmul_bt)(const T* gy, const T* w, T* gx, std::size_t rows,
                    std::size_t in, std::size_t out);
  // gw[in,out] += x[rows,in]^T @ gy[rows,out]
  void (*matmul_tn_acc)(const T* x, const T* gy, T* gw, std::size_t rows,
                        std::size_t in, std::size_t out);
  void (*axpy)(T* y, T a, const T* x, std::size_t n);          // y += a*x
  void (*fmadd)(T* y, const T* a, const T* b, std::size_t n);  // y += a.*b
  void (*add)(T* y, const T* a, const T* b, std::size_t n);
  void (*sub)(T* y, const T* a, const T* b, std::size_t n);
  void (*mul)(T* y, const T* a, const T* b, std::size_t n);
  void (*scale)(T* y, const T* a, T s, std::size_t n);
  // lo = (a+b)*inv_sqrt2, hi = (a-b)*inv_sqrt2
  void (*haar_pair)(T* lo, T* hi, const T* a, const T* b, std::size_t n);
  // a = (lo+hi)*inv_sqrt2, b = (lo-hi)*inv_sqrt2
  void (*haar_unpair)(T* a, T* b, const T* lo, const T* hi, std::size_t n);
  void (*soft_shrink)(T* y, const T* x, T theta, std::size_t n);
  double (*sum)(const T* x, std::size_t n);
  double (*sum_abs)(const T* x, std::size_t n);
  double (*sum_sq)(const T* x, std::size_t n);
};

template <typename T>
const Table<T>& ops();

extern template const Table<float>& ops<float>();
extern template const Table<double>& ops<double>();

namespace scalar {
template <typename T>
const Table<T>& table();
}

#if VVAE_HAVE_AVX2
namespace avx2 {
template <typename T>
const Table<T>& table();
}
#endif

}  // namespace vvae::kern

#include "vvae/kernels/kernels.hpp"

#include <stdexcept>

#include "vvae/kernels/kernels_scalar.hpp"

namespace vvae::kern {

namespace scalar {

template <typename T>
const Table<T>& table() {
  static const Table<T> t = {
      &scalar_impl::matmul<T>,    &scalar_impl::matmul_bt<T>,
      &scalar_impl::matmul_tn_acc<T>, &scalar_impl::axpy<T>,
      &scalar_impl::fmadd<T>,     &scalar_impl::add<T>,
      &scalar_impl::sub<T>,       &scalar_impl::mul<T>,
      &scalar_impl::scale<T>,     &scalar_impl::haar_pair<T>,
      &scalar_impl::haar_unpair<T>, &scalar_impl::soft_shrink<T>,
      &scalar_impl::sum<T>,       &scalar_impl::sum_abs<T>,
      &scalar_impl::sum_sq<T>,
  };
  return t;
}

template const Table<float>& table<float>();
template const Table<double>& table<double>();

}  // namespace scalar

bool cpu_has_avx2() {
#if VVAE_HAVE_AVX2
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {
Backend g_backend = cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
}

Backend active_backend() { return g_backend; }

void force_backend(Backend b) {
  if (b == Backend::avx2 && !cpu_has_avx2())
    throw std::runtime_error("avx2 backend not supported on this CPU");
  g_backend = b;
}

const char* backend_name(Backend b) {
  return b == Backend::avx2 ? "avx2" : "scalar";
}

template <typename T>
const Table<T>& ops() {
#if VVAE_HAVE_AVX2
  if (g_backend == Backend::avx2) return avx2::table<T>();
#endif
  return scalar::table<T>();
}

template const Table<float>& ops<float>();
template const Table<double>& ops<double>();

}  // namespace vvae::kern

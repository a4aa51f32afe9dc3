#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vvae/core/error.hpp"

namespace vvae {

// Live tensor payload bytes, for the streaming-memory tests.
struct AllocStats {
  std::int64_t current_bytes;
  std::int64_t peak_bytes;
};
AllocStats alloc_stats();
void reset_peak_alloc();
namespace detail {
void account_alloc(std::int64_t bytes);
}

template <typename T>
constexpr std::uint8_t dtype_code() {
  static_assert(sizeof(T) == 4 || sizeof(T) == 8);
  return sizeof(T) == 4 ? 1 : 2;
}

// Dense row-major N-d array. Immutable by convention once an op returns it;
// ops produce fresh tensors rather than writing through aliases.
template <typename T>
class Tensor {
 public:
  using scalar = T;

  Tensor() = default;

  explicit Tensor(std::vector<std::int64_t> shape)
      : shape_(std::move(shape)), data_(checked_numel(shape_)) {
    detail::account_alloc(bytes());
  }

  Tensor(std::vector<std::int64_t> shape, T fill)
      : shape_(std::move(shape)), data_(checked_numel(shape_), fill) {
    detail::account_alloc(bytes());
  }

  Tensor(const Tensor& o) : shape_(o.shape_), data_(o.data_) {
    detail::account_alloc(bytes());
  }

  Tensor(Tensor&& o) noexcept
      : shape_(std::move(o.shape_)), data_(std::move(o.data_)) {
    o.shape_.clear();
    o.data_.clear();
  }

  Tensor& operator=(const Tensor& o) {
    if (this != &o) {
      detail::account_alloc(-bytes());
      shape_ = o.shape_;
      data_ = o.data_;
      detail::account_alloc(bytes());
    }
    return *this;
  }

  Tensor& operator=(Tensor&& o) noexcept {
    if (this != &o) {
      detail::account_alloc(-bytes());
      shape_ = std::move(o.shape_);
      data_ = std::move(o.data_);
      o.shape_.clear();
      o.data_.clear();
    }
    return *this;
  }

  ~Tensor() { detail::account_alloc(-bytes()); }

  static Tensor zeros(std::vector<std::int64_t> shape) {
    return Tensor(std::move(shape));
  }
  static Tensor full(std::vector<std::int64_t> shape, T v) {
    return Tensor(std::move(shape), v);
  }

  bool defined() const { return !shape_.empty() || !data_.empty(); }
  const std::vector<std::int64_t>& shape() const { return shape_; }
  int ndim() const { return static_cast<int>(shape_.size()); }
  std::int64_t extent(int axis) const { return shape_[axis]; }
  std::int64_t numel() const { return static_cast<std::int64_t>(data_.size()); }
  std::int64_t bytes() const { return numel() * std::int64_t(sizeof(T)); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  T& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
  const T& operator[](std::int64_t i) const {
    return data_[static_cast<std::size_t>(i)];
  }

  // Same data, new shape; element count must match.
  Tensor reshaped(std::vector<std::int64_t> shape) const {
    Tensor out(std::move(shape));
    if (out.numel() != numel())
      throw shape_error("reshape: element count mismatch");
    out.data_ = data_;
    return out;
  }

 private:
  static std::size_t checked_numel(const std::vector<std::int64_t>& shape) {
    std::int64_t n = 1;
    for (std::int64_t e : shape) {
      if (e < 0) throw shape_error("negative extent");
      n *= e;
    }
    return static_cast<std::size_t>(n);
  }

  std::vector<std::int64_t> shape_;
  std::vector<T> data_;
};

std::string shape_str(const std::vector<std::int64_t>& s);

inline bool same_shape(const std::vector<std::int64_t>& a,
                       const std::vector<std::int64_t>& b) {
  return a == b;
}

template <typename T>
std::int64_t rows_before_last(const Tensor<T>& x) {
  if (x.ndim() == 0) throw shape_error("expected at least 1 axis");
  return x.numel() / x.shape().back();
}

}  // namespace vvae

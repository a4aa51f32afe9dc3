#pragma once

#include <iosfwd>
#include <string>

#include "vvae/core/tensor.hpp"

// NTSR container: magic "NTSR", u8 version=1, u8 dtype (1=f32, 2=f64),
// u8 ndim, u8 reserved=0, then ndim little-endian u64 extents, then the
// row-major payload, little-endian.

namespace vvae {

template <typename T>
void write_ntsr(std::ostream& os, const Tensor<T>& t);

template <typename T>
void write_ntsr_file(const std::string& path, const Tensor<T>& t);

// Throws input_error on bad magic/version/dtype, io_error on truncation.
template <typename T>
Tensor<T> read_ntsr(std::istream& is);

template <typename T>
Tensor<T> read_ntsr_file(const std::string& path);

// Header probe without payload decode.
struct NtsrInfo {
  std::uint8_t version;
  std::uint8_t dtype;
  std::vector<std::int64_t> shape;
};
NtsrInfo read_ntsr_info(std::istream& is);

}  // namespace vvae

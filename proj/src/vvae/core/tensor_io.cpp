#include "vvae/core/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "vvae/core/error.hpp"

namespace vvae {

namespace {

void put_u64le(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = (v >> (8 * i)) & 0xff;
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64le(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  if (!is) throw io_error("ntsr: truncated header");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
  return v;
}

// Payloads are written via memcpy; supported targets are little-endian.
static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "unexpected endianness");

}  // namespace

template <typename T>
void write_ntsr(std::ostream& os, const Tensor<T>& t) {
  const char magic[4] = {'N', 'T', 'S', 'R'};
  os.write(magic, 4);
  const unsigned char hdr[4] = {1, dtype_code<T>(),
                                static_cast<unsigned char>(t.ndim()), 0};
  os.write(reinterpret_cast<const char*>(hdr), 4);
  for (std::int64_t e : t.shape()) put_u64le(os, std::uint64_t(e));
  os.write(reinterpret_cast<const char*>(t.data()),
           std::streamsize(t.numel() * std::int64_t(sizeof(T))));
  if (!os) throw io_error("ntsr: write failed");
}

template <typename T>
void write_ntsr_file(const std::string& path, const Tensor<T>& t) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw io_error("ntsr: cannot open for write: " + path);
  write_ntsr(f, t);
}

NtsrInfo read_ntsr_info(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "NTSR", 4) != 0)
    throw input_error("ntsr: bad magic");
  unsigned char hdr[4];
  is.read(reinterpret_cast<char*>(hdr), 4);
  if (!is) throw io_error("ntsr: truncated header");
  if (hdr[0] != 1)
    throw input_error("ntsr: unsupported version " + std::to_string(hdr[0]));
  if (hdr[1] != 1 && hdr[1] != 2)
    throw input_error("ntsr: unknown dtype code " + std::to_string(hdr[1]));
  NtsrInfo info;
  info.version = hdr[0];
  info.dtype = hdr[1];
  info.shape.resize(hdr[2]);
  for (auto& e : info.shape) e = std::int64_t(get_u64le(is));
  return info;
}

template <typename T>
Tensor<T> read_ntsr(std::istream& is) {
  const NtsrInfo info = read_ntsr_info(is);
  if (info.dtype != dtype_code<T>())
    throw input_error("ntsr: dtype mismatch (file has code " +
                      std::to_string(info.dtype) + ")");
  Tensor<T> t(info.shape);
  is.read(reinterpret_cast<char*>(t.data()),
          std::streamsize(t.numel() * std::int64_t(sizeof(T))));
  if (!is) throw io_error("ntsr: truncated payload");
  return t;
}

template <typename T>
Tensor<T> read_ntsr_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw input_error("ntsr: cannot open: " + path);
  return read_ntsr<T>(f);
}

template void write_ntsr<float>(std::ostream&, const Tensor<float>&);
template void write_ntsr<double>(std::ostream&, const Tensor<double>&);
template void write_ntsr_file<float>(const std::string&, const Tensor<float>&);
template void write_ntsr_file<double>(const std::string&,
                                      const Tensor<double>&);
template Tensor<float> read_ntsr<float>(std::istream&);
template Tensor<double> read_ntsr<double>(std::istream&);
template Tensor<float> read_ntsr_file<float>(const std::string&);
template Tensor<double> read_ntsr_file<double>(const std::string&);

}  // namespace vvae

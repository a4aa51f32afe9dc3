#include "vvae/io/lvid.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "vvae/core/error.hpp"

namespace vvae {

namespace {

void put_u32le(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = (v >> (8 * i)) & 0xff;
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32le(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(b[i]) << (8 * i);
  return v;
}

void validate(const LvidVideo& v, const char* where) {
  if (v.frames < 1 || v.frames % 4 != 1)
    throw input_error(std::string(where) +
                      ": frame count must be 1 (mod 4), got " +
                      std::to_string(v.frames));
  if (v.height < 1 || v.width < 1)
    throw input_error(std::string(where) + ": empty frame geometry");
  if (std::int64_t(v.rgb.size()) != v.frames * v.height * v.width * 3)
    throw input_error(std::string(where) + ": payload length mismatch");
}

}  // namespace

void write_lvid(const std::string& path, const LvidVideo& v) {
  validate(v, "lvid write");
  std::ofstream f(path, std::ios::binary);
  if (!f) throw io_error("lvid: cannot open for write: " + path);
  f.write("LVID", 4);
  const unsigned char ver = 1, cs = 1, reserved[2] = {0, 0};
  f.write(reinterpret_cast<const char*>(&ver), 1);
  f.write(reinterpret_cast<const char*>(&cs), 1);
  f.write(reinterpret_cast<const char*>(reserved), 2);
  put_u32le(f, std::uint32_t(v.frames));
  put_u32le(f, std::uint32_t(v.height));
  put_u32le(f, std::uint32_t(v.width));
  f.write(reinterpret_cast<const char*>(v.rgb.data()),
          std::streamsize(v.rgb.size()));
  if (!f) throw io_error("lvid: write failed: " + path);
}

LvidVideo read_lvid(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw input_error("lvid: cannot open: " + path);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, "LVID", 4) != 0)
    throw input_error("lvid: bad magic in " + path);
  unsigned char ver, cs, reserved[2];
  f.read(reinterpret_cast<char*>(&ver), 1);
  f.read(reinterpret_cast<char*>(&cs), 1);
  f.read(reinterpret_cast<char*>(reserved), 2);
  if (!f) throw io_error("lvid: truncated header");
  if (ver != 1) throw input_error("lvid: unsupported version");
  if (cs != 1) throw input_error("lvid: unsupported colorspace");
  LvidVideo v;
  v.frames = get_u32le(f);
  v.height = get_u32le(f);
  v.width = get_u32le(f);
  if (!f) throw io_error("lvid: truncated header");
  if (v.frames % 4 != 1 || v.frames < 1)
    throw input_error("lvid: frame count must be 1 (mod 4)");
  v.rgb.resize(std::size_t(v.frames * v.height * v.width * 3));
  f.read(reinterpret_cast<char*>(v.rgb.data()), std::streamsize(v.rgb.size()));
  if (!f) throw input_error("lvid: truncated payload");
  return v;
}

template <typename T>
Tensor<T> lvid_to_tensor(const LvidVideo& v) {
  validate(v, "lvid");
  Tensor<T> t({v.frames, v.height, v.width, 3});
  for (std::int64_t i = 0; i < t.numel(); ++i)
    t[i] = static_cast<T>(double(v.rgb[std::size_t(i)]) / 127.5 - 1.0);
  return t;
}

template <typename T>
LvidVideo tensor_to_lvid(const Tensor<T>& t) {
  if (t.ndim() != 4 || t.extent(3) != 3)
    throw shape_error("lvid: tensor must be [frames,H,W,3]");
  LvidVideo v;
  v.frames = t.extent(0);
  v.height = t.extent(1);
  v.width = t.extent(2);
  v.rgb.resize(std::size_t(t.numel()));
  for (std::int64_t i = 0; i < t.numel(); ++i) {
    double b = std::round((double(t[i]) + 1.0) * 127.5);
    if (b < 0.0) b = 0.0;
    if (b > 255.0) b = 255.0;
    v.rgb[std::size_t(i)] = std::uint8_t(b);
  }
  validate(v, "lvid");
  return v;
}

template Tensor<float> lvid_to_tensor<float>(const LvidVideo&);
template Tensor<double> lvid_to_tensor<double>(const LvidVideo&);
template LvidVideo tensor_to_lvid<float>(const Tensor<float>&);
template LvidVideo tensor_to_lvid<double>(const Tensor<double>&);

}  // namespace vvae

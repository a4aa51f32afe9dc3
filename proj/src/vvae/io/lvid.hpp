#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vvae/core/tensor.hpp"

// LVID raw video container: magic "LVID", u8 version=1, u8 colorspace
// (1 = RGB8), u16 reserved, u32 frames, u32 height, u32 width (all
// little-endian), then frames*H*W*3 bytes, frame-major. Frame count must be
// 1 (mod 4).

namespace vvae {

struct LvidVideo {
  std::int64_t frames = 0, height = 0, width = 0;
  std::vector<std::uint8_t> rgb;  // frames*H*W*3
};

void write_lvid(const std::string& path, const LvidVideo& v);
LvidVideo read_lvid(const std::string& path);

// Bytes map to [-1, 1] via v/127.5 - 1; the inverse rounds and clamps.
template <typename T>
Tensor<T> lvid_to_tensor(const LvidVideo& v);
template <typename T>
LvidVideo tensor_to_lvid(const Tensor<T>& t);

}  // namespace vvae

#pragma once

#include <cstdint>

#include "vvae/core/tensor.hpp"

// Synthetic clips: a flat random background with moving colored rectangles
// and Gaussian blobs, per-clip random velocities, wrap-around motion.
// Same (seed, index) gives a bit-identical clip.

namespace vvae {

struct ClipSpec {
  std::int64_t frames = 17;  // must be 1 (mod 4)
  std::int64_t height = 32;
  std::int64_t width = 32;
};

template <typename T>
Tensor<T> synth_clip(const ClipSpec& spec, std::uint64_t corpus_seed,
                     std::int64_t index);

}  // namespace vvae

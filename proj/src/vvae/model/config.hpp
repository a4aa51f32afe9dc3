#pragma once

#include <cstdint>
#include <string>

#include "vvae/core/error.hpp"

namespace vvae {

// Encoder/decoder topology. `split` processes low- and high-frequency
// streams separately before fusing (the default); `joint` concatenates the
// two embeddings and runs one stack; `no_wavelet` patches raw RGB.
enum class ArchVariant : int { joint = 1, split = 2, no_wavelet = 3 };

enum class BottleneckKind : int { cs, ae };

struct ModelConfig {
  int d1 = 128;
  int d2 = 384;
  int D = 512;
  int d = 4;  // latent channels
  int K = 2;  // recovery iterations
  int ff_expansion = 4;
  ArchVariant variant = ArchVariant::split;
  BottleneckKind bottleneck = BottleneckKind::cs;
  bool patch_norm = false;
  std::uint64_t seed = 1;

  // Fixed compression factors in v1.
  static constexpr int c_s = 8;
  static constexpr int c_t = 4;

  // Patch geometry. Wavelet variants patch frequency coefficients with
  // 2x4x4 (video) / 4x4 (image); the no-wavelet variant patches raw RGB
  // with 4x8x8 / 8x8. Both yield the same token grid.
  int video_pt() const { return variant == ArchVariant::no_wavelet ? 4 : 2; }
  int video_ps() const { return variant == ArchVariant::no_wavelet ? 8 : 4; }
  int image_ps() const { return variant == ArchVariant::no_wavelet ? 8 : 4; }

  // Raw patch vector widths per stream.
  int video_lc_dim() const { return 3 * video_pt() * video_ps() * video_ps(); }
  int video_hc_dim() const { return 21 * video_pt() * video_ps() * video_ps(); }
  int image_lc_dim() const { return 3 * image_ps() * image_ps(); }
  int image_hc_dim() const { return 9 * image_ps() * image_ps(); }

  // Single-stack depth for the joint and no-wavelet variants, chosen for
  // parameter parity with the split configuration.
  int joint_layers() const { return 6; }

  bool uses_wavelet() const { return variant != ArchVariant::no_wavelet; }

  void validate() const {
    if (d1 <= 0 || d2 <= 0 || D <= 0 || d <= 0 || K < 1 || ff_expansion < 1)
      throw config_error("config: dimensions must be positive");
    if (d1 + d2 != D)
      throw config_error("config: d1 + d2 must equal D (" +
                         std::to_string(d1) + " + " + std::to_string(d2) +
                         " != " + std::to_string(D) + ")");
  }
};

}  // namespace vvae

#pragma once

#include "vvae/model/backbone.hpp"
#include "vvae/model/config.hpp"
#include "vvae/wavelet/haar.hpp"

// Image-video joint patchify in the frequency domain. Frame 0 goes through
// a 2D transform and 4x4 patches; frames 1..T through a 3D transform and
// 2x4x4 patches; the two token streams are concatenated along time with the
// frame-0 row first. The no-wavelet variant patches raw RGB (8x8 / 4x8x8).
// Patch vectors are flattened channel-slowest.

namespace vvae {

// x: [1+T, H, W, 3] (leading_frame) or [T, H, W, 3] video-only continuation
// chunk (leading_frame == false; used by streaming).
template <class A>
PatchEmb<A> patchify(const A& x, const PatchifierW<A>& w,
                     const ModelConfig& cfg, bool leading_frame = true);

// Inverse projections, patch scatter and inverse transforms back to RGB.
template <class A>
A unpatchify(const PatchEmb<A>& emb, const PatchifierW<A>& w,
             const ModelConfig& cfg, bool leading_frame = true);

}  // namespace vvae

#pragma once

#include "vvae/model/stream_state.hpp"
#include "vvae/model/weights.hpp"

// NAF block: causal depthwise 3x3x3 conv -> GELU -> per-token feedforward;
// the residual (ResNAF) spans the whole block. Encoder/decoder stacks are
// assembled from these per the configured variant.

namespace vvae {

template <class A>
struct PatchEmb {
  A pl, ph;  // low-/high-frequency token embeddings (ph unused for variant 3)
};

template <class A>
A linear(const A& x, const LinearW<A>& w) {
  return add_bias_lastdim(matmul_lastdim(x, w.w), w.b);
}

template <class A>
A naf_forward(const A& x, const NafW<A>& w, bool residual,
              StreamState<ad::scalar_of_t<A>>* ss = nullptr);

template <class A>
A naf_chain(const A& x, const std::vector<NafW<A>>& layers, bool residual,
            StreamState<ad::scalar_of_t<A>>* ss = nullptr);

// p = fuse(cat(lc(pl), hc(ph))) for the split variant; single fused stack
// otherwise (joint takes cat(pl, ph), no_wavelet takes pl alone).
template <class A>
A encoder_forward(const PatchEmb<A>& p, const CoderW<A>& w,
                  StreamState<ad::scalar_of_t<A>>* ss = nullptr);

// Mirror of the encoder: fused stack, then channel split into (d2, d1)
// stream stacks (split/joint); single stack for no_wavelet.
template <class A>
PatchEmb<A> decoder_forward(const A& p, const CoderW<A>& w,
                            StreamState<ad::scalar_of_t<A>>* ss = nullptr);

}  // namespace vvae

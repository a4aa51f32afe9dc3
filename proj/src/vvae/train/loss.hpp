#pragma once

#include <functional>

#include "vvae/model/bottleneck.hpp"
#include "vvae/wavelet/haar.hpp"

// Training objective: L1 reconstruction in RGB and in the frequency domain
// (same subbands the patchifier consumes), a KL term on the latent heads,
// and pluggable perceptual/adversarial hooks that ship unbound with zero
// weight. Terms with weight zero are never evaluated.

namespace vvae {

struct LossWeights {
  double lambda_lpips = 0.0;
  double lambda_adv = 0.0;
  double lambda_kl = 1e-7;
  bool recon_rgb = true;
  bool recon_freq = true;
};

// Hook slot: scalar loss from (x, x_hat) recorded on the same tape.
template <typename T>
using LossHook =
    std::function<ad::Var<T>(ad::Var<T> x, ad::Var<T> x_hat)>;

template <typename T>
struct LossHooks {
  LossHook<T> lpips;  // unbound by default
  LossHook<T> adv;
};

template <class A>
struct LossTerms {
  A total, rgb, freq, kl;
  bool has_rgb = false, has_freq = false, has_kl = false;
};

// x, x_hat: [1+T, H, W, 3]. heads may be null (or stats-free) -> no KL.
template <class A>
LossTerms<A> assemble_loss(const A& x, const A& x_hat,
                           const LatentHeads<A>* heads,
                           const LossWeights& lw);

// mean|x - x_hat| + element-weighted mean L1 over the 2D/3D subbands.
template <class A>
A recon_loss(const A& x, const A& x_hat, bool rgb_on = true,
             bool freq_on = true);

}  // namespace vvae

#pragma once

#include "vvae/core/rng.hpp"
#include "vvae/model/backbone.hpp"

// Latent channel bottleneck. The sensing matrix maps tokens D -> d; the
// recovery runs K unrolled iterations, each a gradient step on the
// measurement fidelity followed by a learned shrinkage correction:
//   r_k = p_{k-1} - rho_k * Phi^T (Phi p_{k-1} - z)
//   p_k = r_k + Ft_k( soft( F_k(r_k), theta_k ) )
// F/Ft are two-layer non-residual NAF stacks (the "+ r_k" is the residual).
// The plain two-linear-layer autoencoder baseline keeps equally sized NAF
// stacks as post-processing after the up-projection so parameter counts
// match.

namespace vvae {

template <class A>
struct LatentHeads {
  A z, mu, logvar;
  bool has_stats = false;  // false for the AE baseline
};

// sampling: reparameterized draw from (mu, logvar); requires rng. Otherwise
// z == mu exactly.
template <class A>
LatentHeads<A> sense(const A& p, const BottleneckW<A>& w, bool sampling,
                     Rng* rng);

template <class A>
A recover(const A& z, const BottleneckW<A>& w,
          StreamState<ad::scalar_of_t<A>>* ss = nullptr);

// 0.5 * mean(mu^2 + exp(logvar) - 1 - logvar)
template <class A>
A kl_term(const A& mu, const A& logvar) {
  using T = ad::scalar_of_t<A>;
  A t = sub(add_scalar(add(mul(mu, mu), exp_elem(logvar)), T(-1)), logvar);
  return scale(mean_scalar(t), T(0.5));
}

}  // namespace vvae

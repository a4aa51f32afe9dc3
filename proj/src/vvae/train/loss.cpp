#include "vvae/train/loss.hpp"

namespace vvae {

namespace {

// Frequency-domain L1: frame 0 through the 2D transform, the rest through
// the 3D transform, one mean over all subband elements.
template <class A>
A freq_l1(const A& x, const A& x_hat) {
  using T = ad::scalar_of_t<A>;
  const auto& s = ad::value_of(x).shape();
  const std::int64_t Tv = s[0] - 1, H = s[1], W = s[2];

  A x0 = reshape(slice_axis0(x, 0, 1), {H, W, 3});
  A y0 = reshape(slice_axis0(x_hat, 0, 1), {H, W, 3});
  A d2 = sub(dwt2_packed(x0), dwt2_packed(y0));
  const double n2 = double(ad::value_of(d2).numel());
  if (Tv == 0) return mean_abs_scalar(d2);

  A d3 = sub(dwt3_packed(slice_axis0(x, 1, Tv)),
             dwt3_packed(slice_axis0(x_hat, 1, Tv)));
  const double n3 = double(ad::value_of(d3).numel());
  return add(scale(mean_abs_scalar(d2), T(n2 / (n2 + n3))),
             scale(mean_abs_scalar(d3), T(n3 / (n2 + n3))));
}

}  // namespace

template <class A>
A recon_loss(const A& x, const A& x_hat, bool rgb_on, bool freq_on) {
  using T = ad::scalar_of_t<A>;
  if (!same_shape(ad::value_of(x).shape(), ad::value_of(x_hat).shape()))
    throw shape_error("recon_loss: shape mismatch");
  if (!rgb_on && !freq_on) throw input_error("recon_loss: no active domain");
  if (rgb_on && !freq_on) return mean_abs_scalar(sub(x, x_hat));
  if (!rgb_on) return freq_l1(x, x_hat);
  return add(mean_abs_scalar(sub(x, x_hat)), freq_l1(x, x_hat));
}

template <class A>
LossTerms<A> assemble_loss(const A& x, const A& x_hat,
                           const LatentHeads<A>* heads,
                           const LossWeights& lw) {
  using T = ad::scalar_of_t<A>;
  if (!same_shape(ad::value_of(x).shape(), ad::value_of(x_hat).shape()))
    throw shape_error("assemble_loss: shape mismatch");
  LossTerms<A> out;
  A total{};
  bool have = false;
  auto accumulate_term = [&](const A& term, double weight) {
    A scaled = weight == 1.0 ? term : scale(term, T(weight));
    total = have ? add(total, scaled) : scaled;
    have = true;
  };
  if (lw.recon_rgb) {
    out.rgb = mean_abs_scalar(sub(x, x_hat));
    out.has_rgb = true;
    accumulate_term(out.rgb, 1.0);
  }
  if (lw.recon_freq) {
    out.freq = freq_l1(x, x_hat);
    out.has_freq = true;
    accumulate_term(out.freq, 1.0);
  }
  if (lw.lambda_kl > 0.0 && heads && heads->has_stats) {
    out.kl = kl_term(heads->mu, heads->logvar);
    out.has_kl = true;
    accumulate_term(out.kl, lw.lambda_kl);
  }
  if (!have) throw input_error("assemble_loss: empty active-loss set");
  out.total = total;
  return out;
}

#define VVAE_LOSS_INSTANTIATE(A)                                           \
  template A recon_loss<A>(const A&, const A&, bool, bool);                \
  template LossTerms<A> assemble_loss<A>(const A&, const A&,               \
                                         const LatentHeads<A>*,            \
                                         const LossWeights&);

VVAE_LOSS_INSTANTIATE(Tensor<float>)
VVAE_LOSS_INSTANTIATE(Tensor<double>)
VVAE_LOSS_INSTANTIATE(ad::Var<float>)
VVAE_LOSS_INSTANTIATE(ad::Var<double>)
#undef VVAE_LOSS_INSTANTIATE

}  // namespace vvae

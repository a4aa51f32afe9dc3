#include "vvae/model/bottleneck.hpp"

namespace vvae {

namespace {

template <class A>
void require_width(const A& x, std::int64_t want, const char* where) {
  const auto& v = ad::value_of(x);
  if (v.ndim() < 1 || v.shape().back() != want)
    throw shape_error(std::string(where) + ": expected width " +
                      std::to_string(want) + ", got " + shape_str(v.shape()));
}

}  // namespace

template <class A>
LatentHeads<A> sense(const A& p, const BottleneckW<A>& w, bool sampling,
                     Rng* rng) {
  using T = ad::scalar_of_t<A>;
  if (w.kind == BottleneckKind::ae) {
    require_width(p, ad::value_of(w.down.w).extent(0), "sense");
    LatentHeads<A> out;
    out.z = linear(p, w.down);
    out.mu = out.z;
    return out;
  }
  require_width(p, ad::value_of(w.phi).extent(0), "sense");
  LatentHeads<A> out;
  out.has_stats = true;
  out.mu = matmul_lastdim(p, w.phi);
  out.logvar = add_bias_lastdim(matmul_lastdim(p, w.phi_sigma), w.sigma_bias);
  if (sampling) {
    if (!rng) throw input_error("sense: sampling requires a noise source");
    Tensor<T> eps(ad::value_of(out.mu).shape());
    for (std::int64_t i = 0; i < eps.numel(); ++i)
      eps[i] = static_cast<T>(rng->normal());
    A noise = ad::constant_like(out.mu, std::move(eps));
    out.z = add(out.mu, mul(exp_elem(scale(out.logvar, T(0.5))), noise));
  } else {
    out.z = out.mu;
  }
  return out;
}

template <class A>
A recover(const A& z, const BottleneckW<A>& w,
          StreamState<ad::scalar_of_t<A>>* ss) {
  if (w.kind == BottleneckKind::ae) {
    require_width(z, ad::value_of(w.up.w).extent(0), "recover");
    // Plain (non-residual) post stacks, mirroring how the recovery
    // iterations use theirs; the unrolled structure is the only difference
    // between the two bottlenecks.
    return naf_chain(linear(z, w.up), w.post, false, ss);
  }
  require_width(z, ad::value_of(w.phi).extent(1), "recover");
  A p = matmul_lastdim(z, w.phi_tilde);
  for (int k = 0; k < w.K; ++k) {
    // Gradient step on 0.5*||Phi p - z||^2.
    A resid = sub(matmul_lastdim(p, w.phi), z);
    A r = sub(p, scale_param(matmul_lastdim_t(resid, w.phi),
                             w.rho_raw[std::size_t(k)]));
    // Learned correction with soft-shrinkage between the two stacks.
    A theta = softplus(w.theta_raw[std::size_t(k)]);
    A f = r;
    for (int j = 0; j < 2; ++j)
      f = naf_forward(f, w.fwd_nets[std::size_t(2 * k + j)], false, ss);
    A s = soft_shrink(f, theta);
    for (int j = 0; j < 2; ++j)
      s = naf_forward(s, w.bwd_nets[std::size_t(2 * k + j)], false, ss);
    p = add(r, s);
  }
  return p;
}

#define VVAE_BNECK_INSTANTIATE(A)                                         \
  template LatentHeads<A> sense<A>(const A&, const BottleneckW<A>&, bool, \
                                   Rng*);                                 \
  template A recover<A>(const A&, const BottleneckW<A>&,                 \
                        StreamState<ad::scalar_of_t<A>>*);

VVAE_BNECK_INSTANTIATE(Tensor<float>)
VVAE_BNECK_INSTANTIATE(Tensor<double>)
VVAE_BNECK_INSTANTIATE(ad::Var<float>)
VVAE_BNECK_INSTANTIATE(ad::Var<double>)
#undef VVAE_BNECK_INSTANTIATE

}  // namespace vvae

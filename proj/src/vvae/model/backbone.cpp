#include "vvae/model/backbone.hpp"

namespace vvae {

namespace {

template <class A>
void require_width(const A& x, std::int64_t want, const char* where) {
  const auto& v = ad::value_of(x);
  if (v.ndim() < 1 || v.shape().back() != want)
    throw shape_error(std::string(where) + ": expected width " +
                      std::to_string(want) + ", got " +
                      shape_str(v.shape()));
}

}  // namespace

template <class A>
A naf_forward(const A& x, const NafW<A>& w, bool residual,
              StreamState<ad::scalar_of_t<A>>* ss) {
  require_width(x, ad::value_of(w.conv_k).shape().back(), "naf");
  A u = apply_causal_conv(x, w.conv_k, w.conv_b, ss);
  A v = gelu(u);
  A h = gelu(linear(v, w.ff1));
  A f = linear(h, w.ff2);
  return residual ? add(x, f) : f;
}

template <class A>
A naf_chain(const A& x, const std::vector<NafW<A>>& layers, bool residual,
            StreamState<ad::scalar_of_t<A>>* ss) {
  A y = x;
  for (const auto& l : layers) y = naf_forward(y, l, residual, ss);
  return y;
}

template <class A>
A encoder_forward(const PatchEmb<A>& p, const CoderW<A>& w,
                  StreamState<ad::scalar_of_t<A>>* ss) {
  switch (w.variant) {
    case ArchVariant::split: {
      require_width(p.pl, w.d2, "encoder lc");
      require_width(p.ph, w.d1, "encoder hc");
      A a = naf_chain(p.pl, w.lc, true, ss);
      A b = naf_chain(p.ph, w.hc, true, ss);
      return naf_chain(concat_lastdim(a, b), w.fuse, true, ss);
    }
    case ArchVariant::joint: {
      require_width(p.pl, w.d2, "encoder lc");
      require_width(p.ph, w.d1, "encoder hc");
      return naf_chain(concat_lastdim(p.pl, p.ph), w.fuse, true, ss);
    }
    case ArchVariant::no_wavelet:
      require_width(p.pl, w.d1 + w.d2, "encoder");
      return naf_chain(p.pl, w.fuse, true, ss);
  }
  throw config_error("encoder: unknown variant");
}

template <class A>
PatchEmb<A> decoder_forward(const A& p, const CoderW<A>& w,
                            StreamState<ad::scalar_of_t<A>>* ss) {
  require_width(p, w.d1 + w.d2, "decoder");
  A q = naf_chain(p, w.fuse, true, ss);
  switch (w.variant) {
    case ArchVariant::split: {
      A pl = naf_chain(slice_lastdim(q, 0, w.d2), w.lc, true, ss);
      A ph = naf_chain(slice_lastdim(q, w.d2, w.d1), w.hc, true, ss);
      return {pl, ph};
    }
    case ArchVariant::joint:
      return {slice_lastdim(q, 0, w.d2), slice_lastdim(q, w.d2, w.d1)};
    case ArchVariant::no_wavelet:
      return {q, A{}};
  }
  throw config_error("decoder: unknown variant");
}

#define VVAE_BACKBONE_INSTANTIATE(A)                                         \
  template A naf_forward<A>(const A&, const NafW<A>&, bool,                  \
                            StreamState<ad::scalar_of_t<A>>*);               \
  template A naf_chain<A>(const A&, const std::vector<NafW<A>>&, bool,       \
                          StreamState<ad::scalar_of_t<A>>*);                 \
  template A encoder_forward<A>(const PatchEmb<A>&, const CoderW<A>&,        \
                                StreamState<ad::scalar_of_t<A>>*);           \
  template PatchEmb<A> decoder_forward<A>(const A&, const CoderW<A>&,        \
                                          StreamState<ad::scalar_of_t<A>>*);

VVAE_BACKBONE_INSTANTIATE(Tensor<float>)
VVAE_BACKBONE_INSTANTIATE(Tensor<double>)
VVAE_BACKBONE_INSTANTIATE(ad::Var<float>)
VVAE_BACKBONE_INSTANTIATE(ad::Var<double>)
#undef VVAE_BACKBONE_INSTANTIATE

}  // namespace vvae

#pragma once

#include <string>
#include <vector>

#include "vvae/core/autodiff.hpp"
#include "vvae/core/tensor.hpp"
#include "vvae/model/config.hpp"

// Weight containers templated over the array kind A (Tensor<T> for plain
// forwards, ad::Var<T> while recording a tape). for_each visits the active
// parameter set in a fixed order with stable names; checkpointing, the
// optimizer and tape lifting all run off that order.
//
// Matrices are stored row-token oriented: a projection written p -> W p in
// math with W in R^{out x in} is stored as [in, out] and applied with
// matmul_lastdim.

namespace vvae {

template <class A>
struct LinearW {
  A w, b;
};

template <class A>
struct NormW {
  A gamma, beta;
};

template <class A>
struct NafW {
  A conv_k, conv_b;
  LinearW<A> ff1, ff2;
};

namespace detail {

template <class A, class F>
void visit_linear(const std::string& p, LinearW<A>& l, F& f) {
  f(p + ".w", l.w);
  f(p + ".b", l.b);
}

template <class A, class F>
void visit_norm(const std::string& p, NormW<A>& n, F& f) {
  f(p + ".g", n.gamma);
  f(p + ".s", n.beta);
}

template <class A, class F>
void visit_naf(const std::string& p, NafW<A>& n, F& f) {
  f(p + ".conv.k", n.conv_k);
  f(p + ".conv.b", n.conv_b);
  visit_linear(p + ".ff1", n.ff1, f);
  visit_linear(p + ".ff2", n.ff2, f);
}

}  // namespace detail

template <class A>
struct PatchifierW {
  ArchVariant variant = ArchVariant::split;
  bool norm = false;

  LinearW<A> video_lc, video_hc, image_lc, image_hc;
  LinearW<A> inv_video_lc, inv_video_hc, inv_image_lc, inv_image_hc;
  LinearW<A> video_rgb, image_rgb, inv_video_rgb, inv_image_rgb;
  NormW<A> n_video_lc, n_video_hc, n_image_lc, n_image_hc;
  NormW<A> n_video_rgb, n_image_rgb;

  PatchifierW() = default;
  explicit PatchifierW(const ModelConfig& c)
      : variant(c.variant), norm(c.patch_norm) {}

  template <class F>
  void for_each(F&& f) {
    if (variant != ArchVariant::no_wavelet) {
      detail::visit_linear("patch.video_lc", video_lc, f);
      detail::visit_linear("patch.video_hc", video_hc, f);
      detail::visit_linear("patch.image_lc", image_lc, f);
      detail::visit_linear("patch.image_hc", image_hc, f);
      detail::visit_linear("patch.inv_video_lc", inv_video_lc, f);
      detail::visit_linear("patch.inv_video_hc", inv_video_hc, f);
      detail::visit_linear("patch.inv_image_lc", inv_image_lc, f);
      detail::visit_linear("patch.inv_image_hc", inv_image_hc, f);
      if (norm) {
        detail::visit_norm("patch.norm_video_lc", n_video_lc, f);
        detail::visit_norm("patch.norm_video_hc", n_video_hc, f);
        detail::visit_norm("patch.norm_image_lc", n_image_lc, f);
        detail::visit_norm("patch.norm_image_hc", n_image_hc, f);
      }
    } else {
      detail::visit_linear("patch.video_rgb", video_rgb, f);
      detail::visit_linear("patch.image_rgb", image_rgb, f);
      detail::visit_linear("patch.inv_video_rgb", inv_video_rgb, f);
      detail::visit_linear("patch.inv_image_rgb", inv_image_rgb, f);
      if (norm) {
        detail::visit_norm("patch.norm_video_rgb", n_video_rgb, f);
        detail::visit_norm("patch.norm_image_rgb", n_image_rgb, f);
      }
    }
  }
};

// Encoder or decoder stack. split: lc/hc stream stacks plus a fused stack.
// joint and no_wavelet: single fused stack.
template <class A>
struct CoderW {
  std::string prefix;
  ArchVariant variant = ArchVariant::split;
  int d1 = 0, d2 = 0;
  std::vector<NafW<A>> lc, hc, fuse;

  CoderW() = default;
  CoderW(std::string pfx, const ModelConfig& c)
      : prefix(std::move(pfx)), variant(c.variant), d1(c.d1), d2(c.d2) {
    if (variant == ArchVariant::split) {
      lc.resize(2);
      hc.resize(2);
      fuse.resize(4);
    } else {
      fuse.resize(std::size_t(c.joint_layers()));
    }
  }

  template <class F>
  void for_each(F&& f) {
    for (std::size_t i = 0; i < lc.size(); ++i)
      detail::visit_naf(prefix + ".lc" + std::to_string(i), lc[i], f);
    for (std::size_t i = 0; i < hc.size(); ++i)
      detail::visit_naf(prefix + ".hc" + std::to_string(i), hc[i], f);
    for (std::size_t i = 0; i < fuse.size(); ++i)
      detail::visit_naf(prefix + ".fuse" + std::to_string(i), fuse[i], f);
  }
};

template <class A>
struct BottleneckW {
  BottleneckKind kind = BottleneckKind::cs;
  int K = 2;

  // Compressed-sensing path. phi holds the sensing matrix transposed
  // ([D,d]); phi_tilde the learned init map ([d,D]).
  A phi, phi_sigma, sigma_bias, phi_tilde;
  std::vector<A> rho_raw, theta_raw;       // one scalar per iteration
  std::vector<NafW<A>> fwd_nets, bwd_nets; // two layers per iteration

  // Plain autoencoder baseline.
  LinearW<A> down, up;
  std::vector<NafW<A>> post;

  BottleneckW() = default;
  explicit BottleneckW(const ModelConfig& c) : kind(c.bottleneck), K(c.K) {
    if (kind == BottleneckKind::cs) {
      rho_raw.resize(std::size_t(K));
      theta_raw.resize(std::size_t(K));
      fwd_nets.resize(std::size_t(2 * K));
      bwd_nets.resize(std::size_t(2 * K));
    } else {
      post.resize(std::size_t(4 * K));
    }
  }

  template <class F>
  void for_each(F&& f) {
    if (kind == BottleneckKind::cs) {
      f(std::string("bneck.phi"), phi);
      f(std::string("bneck.phi_sigma"), phi_sigma);
      f(std::string("bneck.sigma_bias"), sigma_bias);
      f(std::string("bneck.phi_tilde"), phi_tilde);
      for (int k = 0; k < K; ++k) {
        const std::string ks = std::to_string(k + 1);
        f("bneck.rho" + ks, rho_raw[std::size_t(k)]);
        f("bneck.theta" + ks, theta_raw[std::size_t(k)]);
        for (int j = 0; j < 2; ++j)
          detail::visit_naf("bneck.f" + ks + "_" + std::to_string(j),
                            fwd_nets[std::size_t(2 * k + j)], f);
        for (int j = 0; j < 2; ++j)
          detail::visit_naf("bneck.ft" + ks + "_" + std::to_string(j),
                            bwd_nets[std::size_t(2 * k + j)], f);
      }
    } else {
      detail::visit_linear("bneck.down", down, f);
      detail::visit_linear("bneck.up", up, f);
      for (std::size_t i = 0; i < post.size(); ++i)
        detail::visit_naf("bneck.post" + std::to_string(i), post[i], f);
    }
  }
};

template <class A>
struct ModelWeights {
  PatchifierW<A> patch;
  CoderW<A> enc, dec;
  BottleneckW<A> bneck;

  ModelWeights() = default;
  explicit ModelWeights(const ModelConfig& c)
      : patch(c), enc("enc", c), dec("dec", c), bneck(c) {}

  template <class F>
  void for_each(F&& f) {
    patch.for_each(f);
    enc.for_each(f);
    bneck.for_each(f);
    dec.for_each(f);
  }
};

// Seeded allocation + initialization (uniform +-1/sqrt(fan_in), zero biases).
template <typename T>
ModelWeights<Tensor<T>> make_model_weights(const ModelConfig& cfg);

template <typename T>
std::int64_t param_count(ModelWeights<Tensor<T>>& w);

// Registers every parameter on the tape, in for_each order.
template <typename T>
ModelWeights<ad::Var<T>> lift(ad::Tape<T>& tape, ModelWeights<Tensor<T>>& w,
                              const ModelConfig& cfg);

}  // namespace vvae

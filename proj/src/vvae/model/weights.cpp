#include "vvae/model/weights.hpp"

#include <cmath>

#include "vvae/core/ops.hpp"
#include "vvae/core/rng.hpp"

namespace vvae {

namespace {

template <typename T>
Tensor<T> uniform_fan_in(std::vector<std::int64_t> shape, std::int64_t fan_in,
                         Rng& rng) {
  const double b = 1.0 / std::sqrt(double(fan_in));
  return fill_uniform<T>(std::move(shape), T(-b), T(b), rng);
}

template <typename T>
void init_linear(LinearW<Tensor<T>>& l, std::int64_t in, std::int64_t out,
                 Rng& rng) {
  l.w = uniform_fan_in<T>({in, out}, in, rng);
  l.b = Tensor<T>({out});
}

template <typename T>
void init_norm(NormW<Tensor<T>>& n, std::int64_t dim) {
  n.gamma = Tensor<T>({dim}, T(1));
  n.beta = Tensor<T>({dim});
}

template <typename T>
void init_naf(NafW<Tensor<T>>& n, std::int64_t width, int expansion,
              Rng& rng) {
  n.conv_k = uniform_fan_in<T>({3, 3, 3, width}, 27, rng);
  n.conv_b = Tensor<T>({width});
  init_linear(n.ff1, width, expansion * width, rng);
  init_linear(n.ff2, expansion * width, width, rng);
}

template <typename T>
Tensor<T> scalar_tensor(T v) {
  Tensor<T> t(std::vector<std::int64_t>{});
  t[0] = v;
  return t;
}

}  // namespace

template <typename T>
ModelWeights<Tensor<T>> make_model_weights(const ModelConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  ModelWeights<Tensor<T>> w(cfg);

  const std::int64_t d1 = cfg.d1, d2 = cfg.d2, D = cfg.D, d = cfg.d;
  const int e = cfg.ff_expansion;

  if (cfg.uses_wavelet()) {
    init_linear(w.patch.video_lc, cfg.video_lc_dim(), d2, rng);
    init_linear(w.patch.video_hc, cfg.video_hc_dim(), d1, rng);
    init_linear(w.patch.image_lc, cfg.image_lc_dim(), d2, rng);
    init_linear(w.patch.image_hc, cfg.image_hc_dim(), d1, rng);
    init_linear(w.patch.inv_video_lc, d2, cfg.video_lc_dim(), rng);
    init_linear(w.patch.inv_video_hc, d1, cfg.video_hc_dim(), rng);
    init_linear(w.patch.inv_image_lc, d2, cfg.image_lc_dim(), rng);
    init_linear(w.patch.inv_image_hc, d1, cfg.image_hc_dim(), rng);
    if (cfg.patch_norm) {
      init_norm(w.patch.n_video_lc, cfg.video_lc_dim());
      init_norm(w.patch.n_video_hc, cfg.video_hc_dim());
      init_norm(w.patch.n_image_lc, cfg.image_lc_dim());
      init_norm(w.patch.n_image_hc, cfg.image_hc_dim());
    }
  } else {
    const std::int64_t vd = 3 * cfg.video_pt() * cfg.video_ps() * cfg.video_ps();
    const std::int64_t id = 3 * cfg.image_ps() * cfg.image_ps();
    init_linear(w.patch.video_rgb, vd, D, rng);
    init_linear(w.patch.image_rgb, id, D, rng);
    init_linear(w.patch.inv_video_rgb, D, vd, rng);
    init_linear(w.patch.inv_image_rgb, D, id, rng);
    if (cfg.patch_norm) {
      init_norm(w.patch.n_video_rgb, vd);
      init_norm(w.patch.n_image_rgb, id);
    }
  }

  auto init_coder = [&](CoderW<Tensor<T>>& c) {
    for (auto& n : c.lc) init_naf(n, d2, e, rng);
    for (auto& n : c.hc) init_naf(n, d1, e, rng);
    for (auto& n : c.fuse) init_naf(n, D, e, rng);
  };
  init_coder(w.enc);

  if (cfg.bottleneck == BottleneckKind::cs) {
    w.bneck.phi = uniform_fan_in<T>({D, d}, D, rng);
    w.bneck.phi_sigma = Tensor<T>({D, d});
    // Near-deterministic latent at init (sigma ~ 0.018), matching the tiny
    // KL weight the training stage uses.
    w.bneck.sigma_bias = Tensor<T>({d}, T(-8));
    w.bneck.phi_tilde = uniform_fan_in<T>({d, D}, d, rng);
    for (int k = 0; k < cfg.K; ++k) {
      w.bneck.rho_raw[std::size_t(k)] = scalar_tensor(T(0.5));
      // softplus(theta_raw) == 0.01 at init
      w.bneck.theta_raw[std::size_t(k)] =
          scalar_tensor(T(std::log(std::expm1(0.01))));
    }
    for (auto& n : w.bneck.fwd_nets) init_naf(n, D, e, rng);
    for (auto& n : w.bneck.bwd_nets) init_naf(n, D, e, rng);
  } else {
    init_linear(w.bneck.down, D, d, rng);
    init_linear(w.bneck.up, d, D, rng);
    for (auto& n : w.bneck.post) init_naf(n, D, e, rng);
  }

  init_coder(w.dec);
  return w;
}

template <typename T>
std::int64_t param_count(ModelWeights<Tensor<T>>& w) {
  std::int64_t n = 0;
  w.for_each([&](const std::string&, Tensor<T>& t) { n += t.numel(); });
  return n;
}

template <typename T>
ModelWeights<ad::Var<T>> lift(ad::Tape<T>& tape, ModelWeights<Tensor<T>>& w,
                              const ModelConfig& cfg) {
  std::vector<Tensor<T>*> src;
  w.for_each([&](const std::string&, Tensor<T>& t) { src.push_back(&t); });
  ModelWeights<ad::Var<T>> out(cfg);
  std::size_t i = 0;
  out.for_each([&](const std::string&, ad::Var<T>& v) {
    v = tape.param(*src.at(i++));
  });
  if (i != src.size())
    throw std::logic_error("lift: weight structure mismatch");
  return out;
}

template ModelWeights<Tensor<float>> make_model_weights<float>(
    const ModelConfig&);
template ModelWeights<Tensor<double>> make_model_weights<double>(
    const ModelConfig&);
template std::int64_t param_count<float>(ModelWeights<Tensor<float>>&);
template std::int64_t param_count<double>(ModelWeights<Tensor<double>>&);
template ModelWeights<ad::Var<float>> lift<float>(ad::Tape<float>&,
                                                  ModelWeights<Tensor<float>>&,
                                                  const ModelConfig&);
template ModelWeights<ad::Var<double>> lift<double>(
    ad::Tape<double>&, ModelWeights<Tensor<double>>&, const ModelConfig&);

}  // namespace vvae

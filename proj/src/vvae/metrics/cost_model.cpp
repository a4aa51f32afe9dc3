#include "vvae/metrics/cost_model.hpp"

namespace vvae {

namespace {

// One NAF block, per token. Conv taps + activations + the two FF matmuls.
double naf_flops(std::int64_t C, int e, bool residual) {
  const double c = double(C);
  double f = 28.0 * c;            // 27 taps + bias add
  f += c;                         // gelu
  f += double(e) * c * c + e * c; // ff1 + bias
  f += double(e) * c;             // gelu
  f += double(e) * c * c + c;     // ff2 + bias
  if (residual) f += c;
  return f;
}

std::int64_t naf_params(std::int64_t C, int e) {
  return 27 * C + C + (C * e * C + e * C) + (e * C * C + C);
}

std::int64_t linear_params(std::int64_t in, std::int64_t out) {
  return in * out + out;
}

double linear_flops(std::int64_t in, std::int64_t out) {
  return double(in) * double(out) + double(out);
}

}  // namespace

CostReport cost_model(const ModelConfig& cfg, std::int64_t frames,
                      std::int64_t H, std::int64_t W) {
  cfg.validate();
  if (frames < 1 || (frames - 1) % ModelConfig::c_t != 0 ||
      H % ModelConfig::c_s || W % ModelConfig::c_s)
    throw shape_error("cost_model: invalid input shape");

  const std::int64_t Tv = frames - 1;
  const std::int64_t Ht = H / ModelConfig::c_s, Wt = W / ModelConfig::c_s;
  const double n_img = double(Ht * Wt);
  const double n_vid = double(Tv / ModelConfig::c_t) * n_img;
  const double n_tok = n_img + n_vid;
  const int e = cfg.ff_expansion;
  const std::int64_t d1 = cfg.d1, d2 = cfg.d2, D = cfg.D, d = cfg.d;

  CostReport rep;

  // Patchifier: transforms + patch projections.
  {
    ModuleCost mc;
    mc.name = "patchifier";
    if (cfg.uses_wavelet()) {
      mc.params = linear_params(cfg.video_lc_dim(), d2) +
                  linear_params(cfg.video_hc_dim(), d1) +
                  linear_params(cfg.image_lc_dim(), d2) +
                  linear_params(cfg.image_hc_dim(), d1) +
                  linear_params(d2, cfg.video_lc_dim()) +
                  linear_params(d1, cfg.video_hc_dim()) +
                  linear_params(d2, cfg.image_lc_dim()) +
                  linear_params(d1, cfg.image_hc_dim());
      if (cfg.patch_norm)
        mc.params += 2 * (cfg.video_lc_dim() + cfg.video_hc_dim() +
                          cfg.image_lc_dim() + cfg.image_hc_dim());
      // Butterfly: 2 ops per element per axis.
      const double wave2 = 4.0 * double(H) * double(W) * 3.0;
      const double wave3 = 6.0 * double(Tv) * double(H) * double(W) * 3.0;
      double enc = wave2 + wave3;
      enc += n_img * (linear_flops(cfg.image_lc_dim(), d2) +
                      linear_flops(cfg.image_hc_dim(), d1));
      enc += n_vid * (linear_flops(cfg.video_lc_dim(), d2) +
                      linear_flops(cfg.video_hc_dim(), d1));
      if (cfg.patch_norm)
        enc += 7.0 * (n_img * (cfg.image_lc_dim() + cfg.image_hc_dim()) +
                      n_vid * (cfg.video_lc_dim() + cfg.video_hc_dim()));
      double dec = wave2 + wave3;
      dec += n_img * (linear_flops(d2, cfg.image_lc_dim()) +
                      linear_flops(d1, cfg.image_hc_dim()));
      dec += n_vid * (linear_flops(d2, cfg.video_lc_dim()) +
                      linear_flops(d1, cfg.video_hc_dim()));
      mc.flops_encode = enc;
      mc.flops_decode = dec;
    } else {
      const std::int64_t vd = cfg.video_lc_dim();  // 3*4*8*8
      const std::int64_t id = cfg.image_lc_dim();  // 3*8*8
      mc.params = linear_params(vd, D) + linear_params(id, D) +
                  linear_params(D, vd) + linear_params(D, id);
      if (cfg.patch_norm) mc.params += 2 * (vd + id);
      double enc = n_img * linear_flops(id, D) + n_vid * linear_flops(vd, D);
      if (cfg.patch_norm) enc += 7.0 * (n_img * id + n_vid * vd);
      double dec = n_img * linear_flops(D, id) + n_vid * linear_flops(D, vd);
      mc.flops_encode = enc;
      mc.flops_decode = dec;
    }
    rep.modules.push_back(mc);
  }

  // Encoder / decoder stacks (symmetric).
  {
    ModuleCost enc;
    enc.name = "encoder";
    if (cfg.variant == ArchVariant::split) {
      enc.params = 2 * naf_params(d2, e) + 2 * naf_params(d1, e) +
                   4 * naf_params(D, e);
      enc.flops_encode = n_tok * (2.0 * naf_flops(d2, e, true) +
                                  2.0 * naf_flops(d1, e, true) +
                                  4.0 * naf_flops(D, e, true));
    } else {
      enc.params = cfg.joint_layers() * naf_params(D, e);
      enc.flops_encode =
          n_tok * double(cfg.joint_layers()) * naf_flops(D, e, true);
    }
    ModuleCost dec = enc;
    dec.name = "decoder";
    dec.flops_decode = dec.flops_encode;
    dec.flops_encode = 0.0;
    rep.modules.push_back(enc);
    rep.modules.push_back(dec);
  }

  // Channel bottleneck.
  {
    ModuleCost mc;
    mc.name = "bottleneck";
    if (cfg.bottleneck == BottleneckKind::cs) {
      mc.params = 2 * D * d + d /* sigma bias */ + d * D +
                  cfg.K * (2 + 4 * naf_params(D, e));
      // sense: mu and logvar heads.
      mc.flops_encode = n_tok * (2.0 * double(D) * d + d);
      // recover: init map + K gradient/correction steps.
      double per_tok = double(D) * d;
      for (int k = 0; k < cfg.K; ++k) {
        per_tok += double(D) * d + d;      // Phi p - z
        per_tok += double(D) * d + 2.0 * D; // Phi^T resid, scale, subtract
        per_tok += 2.0 * naf_flops(D, e, false);
        per_tok += double(D);               // soft-shrink
        per_tok += 2.0 * naf_flops(D, e, false);
        per_tok += double(D);               // + r
      }
      mc.flops_decode = n_tok * per_tok;
    } else {
      mc.params = linear_params(D, d) + linear_params(d, D) +
                  4 * cfg.K * naf_params(D, e);
      mc.flops_encode = n_tok * linear_flops(D, d);
      mc.flops_decode =
          n_tok * (linear_flops(d, D) +
                   4.0 * cfg.K * naf_flops(D, e, true));
    }
    rep.modules.push_back(mc);
  }

  for (const auto& m : rep.modules) {
    rep.total_params += m.params;
    rep.flops_encode += m.flops_encode;
    rep.flops_decode += m.flops_decode;
  }
  rep.flops_total = rep.flops_encode + rep.flops_decode;
  return rep;
}

nlohmann::json CostReport::to_json() const {
  nlohmann::json mods = nlohmann::json::array();
  for (const auto& m : modules)
    mods.push_back({{"name", m.name},
                    {"params", m.params},
                    {"flops_encode", m.flops_encode},
                    {"flops_decode", m.flops_decode}});
  return {{"flop_convention", "mac=1"},
          {"modules", mods},
          {"total_params", total_params},
          {"flops_encode", flops_encode},
          {"flops_decode", flops_decode},
          {"flops_total", flops_total}};
}

}  // namespace vvae

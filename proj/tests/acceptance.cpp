// Acceptance suite: one criterion per section, one [PASS]/[FAIL] line each,
// nonzero exit when anything fails. Thresholds are pinned in code; the
// heavier training criteria run at desk scale on the synthetic corpus.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <set>
#include <sstream>
#include <vector>

#include "vvae/core/autodiff.hpp"
#include "vvae/core/rng.hpp"
#include "vvae/core/tensor_io.hpp"
#include "vvae/metrics/cost_model.hpp"
#include "vvae/metrics/quality.hpp"
#include "vvae/model/streaming.hpp"
#include "vvae/train/trainer.hpp"
#include "vvae/wavelet/haar.hpp"

using namespace vvae;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& name, bool ok,
            const std::string& detail) {
  std::printf("[%s] criterion %2d: %s (%s)\n", ok ? "PASS" : "FAIL", criterion,
              name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::steady_clock::now() - t0)
             .count() /
         1000.0;
}

template <typename T>
Tensor<T> rand_tensor(std::vector<std::int64_t> shape, Rng& rng) {
  Tensor<T> t(std::move(shape));
  for (std::int64_t i = 0; i < t.numel(); ++i)
    t[i] = static_cast<T>(rng.uniform(-1.0, 1.0));
  return t;
}

ModelConfig small_cfg() {
  ModelConfig cfg;
  cfg.d1 = 8;
  cfg.d2 = 24;
  cfg.D = 32;
  cfg.d = 4;
  cfg.seed = 7;
  return cfg;
}

// Desk-scale model: same topology, narrower widths. d is a knob because the
// headline training criterion runs at d=16 (a shipped latent width) while
// the ablation directions run at d=4, matching the published ablations.
ModelConfig desk_cfg(int d) {
  ModelConfig cfg;
  cfg.d1 = 32;
  cfg.d2 = 96;
  cfg.D = 128;
  cfg.d = d;
  cfg.seed = 11;
  return cfg;
}

// ---------------------------------------------------------------- 1

void criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(101);
  double worst32 = 0, worst64 = 0;
  bool ok = true;
  for (int i = 0; i < 500; ++i) {
    const std::int64_t T = 2 * (1 + std::int64_t(rng.next_u64() % 3));
    const std::int64_t H = 2 * (1 + std::int64_t(rng.next_u64() % 6));
    const std::int64_t W = 2 * (1 + std::int64_t(rng.next_u64() % 6));
    const std::int64_t C = 1 + std::int64_t(rng.next_u64() % 3);
    if (i % 2 == 0) {
      auto x = rand_tensor<float>({T, H, W, C}, rng);
      worst32 = std::max(worst32, max_abs_diff(idwt3_packed(dwt3_packed(x)), x));
      auto y = rand_tensor<float>({H, W, C}, rng);
      worst32 = std::max(worst32, max_abs_diff(idwt2_packed(dwt2_packed(y)), y));
    } else {
      auto x = rand_tensor<double>({T, H, W, C}, rng);
      worst64 = std::max(worst64, max_abs_diff(idwt3_packed(dwt3_packed(x)), x));
      auto y = rand_tensor<double>({H, W, C}, rng);
      worst64 = std::max(worst64, max_abs_diff(idwt2_packed(dwt2_packed(y)), y));
    }
  }
  const double secs = seconds_since(t0);
  ok = worst32 < 1e-6 && worst64 < 1e-12 && secs < 30.0;
  std::ostringstream d;
  d << "1000 transforms, max err f32 " << worst32 << ", f64 " << worst64
    << ", " << secs << " s";
  report(1, "wavelet perfect reconstruction", ok, d.str());
}

// ------------------------------------------------------------- 2, 3, 4

void criteria_2_3_4() {
  ModelConfig cfg;  // shipped defaults: variant 2, d = 4
  Autoencoder<float> model(cfg);
  const std::int64_t live = model.param_count();
  const auto rep = cost_model(cfg, 17, 768, 768);

  // Checkpoint manifest agreement.
  const std::string path = "/tmp/vvae_acceptance_default.ntsa";
  model.save(path);
  std::int64_t manifest_total = 0;
  {
    std::ifstream f(path, std::ios::binary);
    f.seekg(8);
    unsigned char lenb[8];
    f.read(reinterpret_cast<char*>(lenb), 8);
    std::uint64_t mlen = 0;
    for (int i = 0; i < 8; ++i) mlen |= std::uint64_t(lenb[i]) << (8 * i);
    std::string body(mlen, '\0');
    f.read(body.data(), std::streamsize(mlen));
    auto manifest = nlohmann::json::parse(body);
    for (const auto& [name, je] : manifest.at("tensors").items()) {
      (void)name;
      std::int64_t n = 1;
      for (const auto& e : je.at("shape")) n *= e.get<std::int64_t>();
      manifest_total += n;
    }
  }
  std::remove(path.c_str());

  {
    const bool ok = live >= 34000000 && live <= 46000000 &&
                    rep.total_params == live && manifest_total == live;
    std::ostringstream d;
    d << "live " << live << ", cost model " << rep.total_params
      << ", manifest " << manifest_total;
    report(2, "parameter count in [34M, 46M] with counter agreement", ok,
           d.str());
  }
  {
    const bool ok = rep.flops_total >= 1.2e12 && rep.flops_total <= 2.6e12;
    std::ostringstream d;
    d << "encode+decode " << rep.flops_total / 1e12 << " TFLOPs at 17x768x768";
    report(3, "flop count consistent with the published envelope", ok, d.str());
  }
  {
    Rng rng(104);
    auto x = rand_tensor<float>({17, 256, 256, 3}, rng);
    auto z = model.encode(x).z;
    const bool enc_ok = z.shape() == std::vector<std::int64_t>{5, 32, 32, 4};
    auto y = model.decode(z);
    const bool dec_ok =
        y.shape() == std::vector<std::int64_t>{17, 256, 256, 3};
    std::ostringstream d;
    d << "encode " << shape_str(z.shape()) << ", decode "
      << shape_str(y.shape());
    report(4, "shape contract at 17x256x256", enc_ok && dec_ok, d.str());
  }
}

// ---------------------------------------------------------------- 5

void criterion_5() {
  Autoencoder<float> model(small_cfg());
  Rng rng(105);
  const std::int64_t hw = 16, rows = 2 * 2 * 4, frame = hw * hw * 3;
  auto x = rand_tensor<float>({17, hw, hw, 3}, rng);
  auto z0 = model.encode(x).z;
  auto y0 = model.decode(z0);
  int violations = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::int64_t t = std::int64_t(rng.next_u64() % 4);
    Tensor<float> x2 = x;
    for (std::int64_t i = (4 * t + 1) * frame; i < x2.numel(); ++i)
      x2[i] = float(rng.uniform(-1, 1));
    auto z2 = model.encode(x2).z;
    for (std::int64_t i = 0; i < (t + 1) * rows; ++i)
      if (z2[i] != z0[i]) {
        ++violations;
        break;
      }
  }
  for (int trial = 0; trial < 100; ++trial) {
    const std::int64_t t = std::int64_t(rng.next_u64() % 4);
    Tensor<float> z2 = z0;
    for (std::int64_t i = (t + 1) * rows; i < z2.numel(); ++i)
      z2[i] = float(rng.uniform(-1, 1));
    auto y2 = model.decode(z2);
    for (std::int64_t i = 0; i < (4 * t + 1) * frame; ++i)
      if (y2[i] != y0[i]) {
        ++violations;
        break;
      }
  }
  std::ostringstream d;
  d << "200 randomized trials, " << violations << " violations";
  report(5, "bit-exact temporal causality", violations == 0, d.str());
}

// ---------------------------------------------------------------- 6

void criterion_6() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst32 = 0, worst64 = 0;
  {
    Autoencoder<float> m(small_cfg());
    Rng rng(106);
    auto x = rand_tensor<float>({17, 16, 16, 3}, rng);
    auto full_z = m.encode(x).z;
    auto full_y = m.decode(full_z);
    for (int trial = 0; trial < 6; ++trial) {
      std::vector<Tensor<float>> chunks;
      std::int64_t a = 1 + std::int64_t(rng.next_u64() % 3);
      chunks.push_back(slice_axis0(x, 0, 1 + 4 * a));
      std::int64_t at = 1 + 4 * a;
      while (at < 17) {
        std::int64_t b = 1 + std::int64_t(rng.next_u64() % 3);
        b = std::min(b, (17 - at) / 4);
        chunks.push_back(slice_axis0(x, at, 4 * b));
        at += 4 * b;
      }
      StreamState<float> ss;
      worst32 = std::max(
          worst32,
          max_abs_diff(full_z, concat_all_axis0(stream_encode(m, chunks, ss))));
      StreamState<float> ds;
      const std::int64_t fr = 1 + std::int64_t(rng.next_u64() % 3);
      const std::int64_t rr = 1 + std::int64_t(rng.next_u64() % 3);
      worst32 = std::max(
          worst32,
          max_abs_diff(full_y, concat_all_axis0(stream_decode(
                                   m, split_rows(full_z, fr, rr), ds))));
    }
  }
  {
    Autoencoder<double> m(small_cfg());
    Rng rng(107);
    auto x = rand_tensor<double>({17, 16, 16, 3}, rng);
    auto full_z = m.encode(x).z;
    auto full_y = m.decode(full_z);
    StreamState<double> ss;
    worst64 = std::max(
        worst64, max_abs_diff(full_z, concat_all_axis0(stream_encode(
                                          m, split_video(x, 5, 4), ss))));
    StreamState<double> ds;
    worst64 = std::max(
        worst64, max_abs_diff(full_y, concat_all_axis0(stream_decode(
                                          m, split_rows(full_z, 2, 1), ds))));
  }
  const double secs = seconds_since(t0);
  const bool ok = worst32 < 1e-5 && worst64 < 1e-12 && secs < 120.0;
  std::ostringstream d;
  d << "max dev f32 " << worst32 << ", f64 " << worst64 << ", " << secs
    << " s";
  report(6, "lossless temporal tiling", ok, d.str());
}

// ---------------------------------------------------------------- 7

struct FdProbe {
  std::vector<Tensor<double>> params;
  std::function<ad::Var<double>(ad::Tape<double>&,
                                std::vector<ad::Var<double>>&)>
      build;

  double eval(const std::vector<Tensor<double>>& vals) const {
    ad::Tape<double> tape;
    std::vector<ad::Var<double>> vars;
    for (const auto& v : vals) vars.push_back(tape.param(v));
    return build(tape, vars).value()[0];
  }

  double max_rel_err(int per_param, Rng& rng) {
    ad::Tape<double> tape;
    std::vector<ad::Var<double>> vars;
    for (const auto& v : params) vars.push_back(tape.param(v));
    auto loss = build(tape, vars);
    tape.backward(loss);
    std::vector<Tensor<double>> analytic;
    for (auto& v : vars) analytic.push_back(tape.grad(v));
    double worst = 0.0;
    const double eps = 1e-5;
    for (std::size_t p = 0; p < params.size(); ++p) {
      const std::int64_t n = params[p].numel();
      for (int probe = 0; probe < per_param; ++probe) {
        const std::int64_t c =
            n <= per_param ? probe : std::int64_t(rng.next_u64() % std::uint64_t(n));
        if (c >= n) break;
        std::vector<Tensor<double>> vals = params;
        const double x0 = vals[p][c];
        vals[p][c] = x0 + eps;
        const double fp = eval(vals);
        vals[p][c] = x0 - eps;
        const double fm = eval(vals);
        const double fd = (fp - fm) / (2 * eps);
        const double an = analytic[p][c];
        worst = std::max(worst, std::fabs(fd - an) / std::max({std::fabs(fd),
                                                               std::fabs(an),
                                                               1e-6}));
      }
    }
    return worst;
  }
};

void criterion_7() {
  Rng rng(108);
  double worst = 0.0;

  // Every differentiable primitive, randomized shapes.
  auto probe = [&](FdProbe p) { worst = std::max(worst, p.max_rel_err(8, rng)); };
  auto project = [](ad::Tape<double>& tape, ad::Var<double> y,
                    std::uint64_t seed) {
    Rng r(seed);
    Tensor<double> c(y.value().shape());
    for (std::int64_t i = 0; i < c.numel(); ++i) c[i] = r.uniform(-1, 1);
    return sum_scalar(mul(y, tape.constant(c)));
  };

  probe({{rand_tensor<double>({3, 5, 4}, rng), rand_tensor<double>({4, 6}, rng),
          rand_tensor<double>({6}, rng)},
         [&](ad::Tape<double>& t, std::vector<ad::Var<double>>& p) {
           return project(
               t, add_bias_lastdim(matmul_lastdim(p[0], p[1]), p[2]), 1);
         }});
  probe({{rand_tensor<double>({4, 6}, rng), rand_tensor<double>({3, 6}, rng)},
         [&](ad::Tape<double>& t, std::vector<ad::Var<double>>& p) {
           return project(t, matmul_lastdim_t(p[0], p[1]), 2);
         }});
  probe({{rand_tensor<double>({4, 3, 3, 2}, rng),
          rand_tensor<double>({3, 3, 3, 2}, rng), rand_tensor<double>({2}, rng)},
         [&](ad::Tape<double>& t, std::vector<ad::Var<double>>& p) {
           return project(t, dwconv3d_causal(p[0], p[1], p[2]), 3);
         }});
  probe({{rand_tensor<double>({30}, rng)},
         [&](ad::Tape<double>& t, std::vector<ad::Var<double>>& p) {
           return project(t, gelu(softplus(exp_elem(scale(p[0], 0.5)))), 4);
         }});
  probe({{rand_tensor<double>({2, 4, 4, 2}, rng)},
         [&](ad::Tape<double>& t, std::vector<ad::Var<double>>& p) {
           return project(t, ad::idwt3_packed(ad::dwt3_packed(p[0])), 5);
         }});

  // End-to-end loss on a tiny model. Threshold raised off its init and a
  // margin guard below keep the probes away from the L1/shrinkage kinks.
  ModelConfig cfg;
  cfg.d1 = 2;
  cfg.d2 = 6;
  cfg.D = 8;
  cfg.d = 2;
  cfg.seed = 21;
  auto weights = make_model_weights<double>(cfg);
  for (auto& th : weights.bneck.theta_raw) th[0] = std::log(std::expm1(0.3));
  Rng data_rng(109);
  auto clip = rand_tensor<double>({5, 8, 8, 3}, data_rng);
  Tensor<double> noise;  // fixed reparameterization draw
  LossWeights lw;

  std::vector<Tensor<double>> params;
  weights.for_each(
      [&](const std::string&, Tensor<double>& t) { params.push_back(t); });

  FdProbe end2end{
      params, [&](ad::Tape<double>& tape, std::vector<ad::Var<double>>& p) {
        ModelWeights<ad::Var<double>> wv(cfg);
        std::size_t i = 0;
        wv.for_each(
            [&](const std::string&, ad::Var<double>& v) { v = p.at(i++); });
        auto x = tape.constant(clip);
        auto emb = patchify(x, wv.patch, cfg);
        auto pe = encoder_forward(emb, wv.enc);
        Rng noise_rng(7);  // same draw every evaluation
        auto heads = sense(pe, wv.bneck, true, &noise_rng);
        auto phat = recover(heads.z, wv.bneck);
        auto demb = decoder_forward(phat, wv.dec);
        auto xhat = unpatchify(demb, wv.patch, cfg);
        auto terms = assemble_loss(x, xhat, &heads, lw);
        return terms.total;
      }};
  (void)noise;
  worst = std::max(worst, end2end.max_rel_err(4, rng));

  std::ostringstream d;
  d << "max relative error " << worst;
  report(7, "finite-difference gradient integrity", worst < 1e-4, d.str());
}

// ---------------------------------------------------------------- 8
// Straight-line scripted implementation of the recovery iterations,
// independent of the production path.

namespace oracle {

struct OT {
  std::vector<std::int64_t> shape;
  std::vector<double> v;
};

OT from(const Tensor<double>& t) {
  return {t.shape(), {t.data(), t.data() + t.numel()}};
}

OT matmul(const OT& x, const OT& w) {
  const std::int64_t in = w.shape[0], out = w.shape[1];
  const std::int64_t rows = std::int64_t(x.v.size()) / in;
  OT y{x.shape, std::vector<double>(std::size_t(rows * out), 0.0)};
  y.shape.back() = out;
  for (std::int64_t r = 0; r < rows; ++r)
    for (std::int64_t i = 0; i < in; ++i)
      for (std::int64_t o = 0; o < out; ++o)
        y.v[std::size_t(r * out + o)] +=
            x.v[std::size_t(r * in + i)] * w.v[std::size_t(i * out + o)];
  return y;
}

OT matmul_t(const OT& x, const OT& w) {
  const std::int64_t in = w.shape[0], out = w.shape[1];
  const std::int64_t rows = std::int64_t(x.v.size()) / out;
  OT y{x.shape, std::vector<double>(std::size_t(rows * in), 0.0)};
  y.shape.back() = in;
  for (std::int64_t r = 0; r < rows; ++r)
    for (std::int64_t i = 0; i < in; ++i)
      for (std::int64_t o = 0; o < out; ++o)
        y.v[std::size_t(r * in + i)] +=
            x.v[std::size_t(r * out + o)] * w.v[std::size_t(i * out + o)];
  return y;
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

OT conv(const OT& x, const Tensor<double>& k, const Tensor<double>& b) {
  const std::int64_t T = x.shape[0], H = x.shape[1], W = x.shape[2],
                     C = x.shape[3];
  OT y{x.shape, std::vector<double>(x.v.size(), 0.0)};
  for (std::int64_t t = 0; t < T; ++t)
    for (std::int64_t h = 0; h < H; ++h)
      for (std::int64_t w = 0; w < W; ++w)
        for (std::int64_t c = 0; c < C; ++c) {
          double acc = b[c];
          for (int dt = 0; dt < 3; ++dt)
            for (int dh = 0; dh < 3; ++dh)
              for (int dw = 0; dw < 3; ++dw) {
                const std::int64_t st = t - 2 + dt, sh = h - 1 + dh,
                                   sw = w - 1 + dw;
                if (st < 0 || st >= T || sh < 0 || sh >= H || sw < 0 ||
                    sw >= W)
                  continue;
                acc += k[((dt * 3 + dh) * 3 + dw) * C + c] *
                       x.v[std::size_t(((st * H + sh) * W + sw) * C + c)];
              }
          y.v[std::size_t(((t * H + h) * W + w) * C + c)] = acc;
        }
  return y;
}

OT naf(const OT& x, const NafW<Tensor<double>>& w) {
  OT u = conv(x, w.conv_k, w.conv_b);
  for (auto& v : u.v) v = gelu(v);
  OT h = matmul(u, from(w.ff1.w));
  const std::int64_t eo = w.ff1.b.numel();
  for (std::int64_t r = 0; r < std::int64_t(h.v.size()) / eo; ++r)
    for (std::int64_t o = 0; o < eo; ++o)
      h.v[std::size_t(r * eo + o)] =
          gelu(h.v[std::size_t(r * eo + o)] + w.ff1.b[o]);
  OT f = matmul(h, from(w.ff2.w));
  const std::int64_t co = w.ff2.b.numel();
  for (std::int64_t r = 0; r < std::int64_t(f.v.size()) / co; ++r)
    for (std::int64_t o = 0; o < co; ++o)
      f.v[std::size_t(r * co + o)] += w.ff2.b[o];
  return f;
}

OT recover(const Tensor<double>& z, BottleneckW<Tensor<double>>& w) {
  OT zo = from(z);
  OT p = matmul(zo, from(w.phi_tilde));
  for (int k = 0; k < w.K; ++k) {
    OT zf = matmul(p, from(w.phi));
    for (std::size_t i = 0; i < zf.v.size(); ++i) zf.v[i] -= zo.v[i];
    OT corr = matmul_t(zf, from(w.phi));
    const double rho = w.rho_raw[std::size_t(k)][0];
    OT r = p;
    for (std::size_t i = 0; i < r.v.size(); ++i)
      r.v[i] = p.v[i] - rho * corr.v[i];
    const double theta = std::log1p(std::exp(w.theta_raw[std::size_t(k)][0]));
    OT f = naf(r, w.fwd_nets[std::size_t(2 * k)]);
    f = naf(f, w.fwd_nets[std::size_t(2 * k + 1)]);
    for (auto& v : f.v) {
      const double m = std::fabs(v) - theta;
      v = m > 0 ? (v < 0 ? -m : m) : 0.0;
    }
    f = naf(f, w.bwd_nets[std::size_t(2 * k)]);
    f = naf(f, w.bwd_nets[std::size_t(2 * k + 1)]);
    for (std::size_t i = 0; i < p.v.size(); ++i) p.v[i] = r.v[i] + f.v[i];
  }
  return p;
}

}  // namespace oracle

void criterion_8() {
  ModelConfig cfg;
  cfg.d1 = 4;
  cfg.d2 = 12;
  cfg.D = 16;
  cfg.d = 4;
  cfg.seed = 23;
  auto w = make_model_weights<double>(cfg);
  w.bneck.rho_raw[0][0] = 0.9;
  w.bneck.rho_raw[1][0] = 0.2;
  w.bneck.theta_raw[0][0] = -0.7;
  w.bneck.theta_raw[1][0] = -1.9;
  Rng rng(110);
  auto z = rand_tensor<double>({2, 4, 4, 4}, rng);
  auto got = recover(z, w.bneck);
  auto want = oracle::recover(z, w.bneck);
  double m = 0;
  for (std::int64_t i = 0; i < got.numel(); ++i)
    m = std::max(m, std::fabs(got[i] - want.v[std::size_t(i)]));
  std::ostringstream d;
  d << "max abs diff " << m;
  report(8, "recovery matches the scripted iteration oracle", m < 1e-10,
         d.str());
}

// ------------------------------------------------------------- 9, 10

TrainConfig desk_train(std::int64_t steps, std::uint64_t data_seed,
                       int d) {
  TrainConfig tc;
  tc.model = desk_cfg(d);
  tc.steps = steps;
  tc.batch = 4;
  tc.clip = {17, 32, 32};
  tc.data_seed = data_seed;
  tc.corpus_clips = 128;
  tc.holdout_clips = 8;
  tc.opt.lr = 1e-3;
  tc.opt.warmup_steps = 100;
  tc.opt.lr_floor = 1e-4;
  tc.opt.total_steps = steps;
  tc.log_every = 0;
  return tc;
}

template <typename T>
double holdout_recon(Trainer<T>& tr) {
  double acc = 0;
  for (std::int64_t i = 0; i < tr.config().holdout_clips; ++i) {
    auto x = tr.holdout_clip(i);
    auto xhat = tr.model().decode(tr.model().encode(x).z);
    acc += double(recon_loss(x, xhat)[0]);
  }
  return acc / double(tr.config().holdout_clips);
}

void criterion_9() {
  const auto t0 = std::chrono::steady_clock::now();

  // Held-out improvement over the untrained model.
  TrainConfig tc = desk_train(5000, 42, 16);
  Trainer<float> tr(tc);
  const double psnr_before = tr.holdout_psnr();
  tr.run();
  const double psnr_after = tr.holdout_psnr();

  // Single-clip overfit: recon loss falls at least 10x in 500 steps.
  TrainConfig oc = desk_train(500, 43, 16);
  oc.batch = 1;
  oc.corpus_clips = 1;
  oc.opt.lr = 2e-3;
  oc.opt.warmup_steps = 50;
  oc.opt.lr_floor = 2e-4;
  Trainer<float> ov(oc);
  const auto clip = ov.train_clip(0);
  auto s0 = ov.train_step({clip});
  const double first_recon = s0.rgb + s0.freq;
  StepStats s{};
  for (int i = 1; i < 500; ++i) s = ov.train_step({clip});
  const double last_recon = s.rgb + s.freq;

  const double secs = seconds_since(t0);
  const bool ok = (psnr_after - psnr_before >= 10.0) &&
                  (last_recon * 10.0 <= first_recon) && secs < 7200.0;
  std::ostringstream d;
  d << "holdout psnr " << psnr_before << " -> " << psnr_after << " dB; "
    << "overfit recon " << first_recon << " -> " << last_recon << "; "
    << secs << " s";
  report(9, "desk-scale training improves reconstruction", ok, d.str());
}

void criterion_10() {
  const std::int64_t steps = 1500;

  TrainConfig cs = desk_train(steps, 77, 4);
  Trainer<float> cs_tr(cs);
  cs_tr.run();
  const double cs_recon = holdout_recon(cs_tr);
  const double cs_psnr = cs_tr.holdout_psnr();

  TrainConfig ae = desk_train(steps, 77, 4);
  ae.model.bottleneck = BottleneckKind::ae;
  Trainer<float> ae_tr(ae);
  ae_tr.run();
  const double ae_recon = holdout_recon(ae_tr);

  TrainConfig pn = desk_train(steps, 77, 4);
  pn.model.patch_norm = true;
  Trainer<float> pn_tr(pn);
  pn_tr.run();
  const double pn_psnr = pn_tr.holdout_psnr();

  {
    std::ostringstream d;
    d << "recon cs " << cs_recon << " vs ae " << ae_recon;
    report(10, "(a) compressed sensing beats the plain autoencoder",
           cs_recon <= ae_recon, d.str());
  }
  {
    std::ostringstream d;
    d << "holdout psnr with norm " << pn_psnr << " vs without " << cs_psnr;
    report(10, "(b) patch normalization degrades reconstruction",
           pn_psnr < cs_psnr, d.str());
  }
}

// ---------------------------------------------------------------- 11

void criterion_11() {
  std::vector<double> params;
  bool finite_ok = true;
  std::ostringstream d;
  for (ArchVariant v :
       {ArchVariant::joint, ArchVariant::split, ArchVariant::no_wavelet}) {
    ModelConfig cfg;  // default dimensions
    cfg.variant = v;
    cfg.seed = 31;
    {
      auto w = make_model_weights<float>(cfg);
      params.push_back(double(param_count(w)));
    }
    TrainConfig tc;
    tc.model = cfg;
    tc.steps = 200;
    tc.batch = 1;
    tc.clip = {17, 32, 32};
    tc.data_seed = 99;
    tc.corpus_clips = 32;
    tc.holdout_clips = 1;
    tc.opt.lr = 1e-4;
    tc.opt.warmup_steps = 50;
    tc.opt.lr_floor = 1e-5;
    tc.opt.total_steps = tc.steps;
    tc.log_every = 0;
    Trainer<float> tr(tc);
    StepStats last{};
    try {
      last = tr.run();
    } catch (const std::exception& e) {
      finite_ok = false;
      d << "variant " << int(v) << " failed: " << e.what() << "; ";
      continue;
    }
    finite_ok = finite_ok && std::isfinite(last.total);
    d << "variant " << int(v) << ": params " << params.back() << ", final "
      << last.total << "; ";
  }
  bool parity = true;
  for (std::size_t i = 0; i < params.size(); ++i)
    for (std::size_t j = 0; j < params.size(); ++j)
      parity = parity && std::fabs(params[i] - params[j]) / params[j] <= 0.2;
  report(11, "architecture variants: smoke training + parameter parity",
         finite_ok && parity && params.size() == 3, d.str());
}

}  // namespace

// With no arguments every criterion runs; otherwise arguments select
// criteria by number (2, 3 and 4 share one model build and run together).
int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  auto want = [&](int c) { return only.empty() || only.count(c); };

  const auto t0 = std::chrono::steady_clock::now();
  if (want(1)) criterion_1();
  if (want(2) || want(3) || want(4)) criteria_2_3_4();
  if (want(5)) criterion_5();
  if (want(6)) criterion_6();
  if (want(7)) criterion_7();
  if (want(8)) criterion_8();
  if (want(9)) criterion_9();
  if (want(10)) criterion_10();
  if (want(11)) criterion_11();
  std::printf("acceptance: %s (%d failed, %.1f s total)\n",
              g_failures == 0 ? "all criteria passed" : "FAILURES",
              g_failures, seconds_since(t0));
  return g_failures == 0 ? 0 : 1;
}

// Command-line front end: encode/decode LVID videos through a checkpoint,
// roundtrip quality reports, training runs, analytic cost reports and a
// quick self-test. Machine-readable JSON goes to stdout, human messages to
// stderr. Exit codes: 0 ok, 1 runtime failure, 2 bad input, 3 model/config
// mismatch, 4 I/O failure.

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <iostream>
#include <json.hpp>

#include "vvae/core/parallel.hpp"
#include "vvae/core/tensor_io.hpp"
#include "vvae/io/lvid.hpp"
#include "vvae/metrics/cost_model.hpp"
#include "vvae/metrics/quality.hpp"
#include "vvae/model/config_json.hpp"
#include "vvae/model/streaming.hpp"
#include "vvae/train/trainer.hpp"
#include "vvae/util/toml.hpp"
#include "vvae/wavelet/haar.hpp"

namespace {

using namespace vvae;
using nlohmann::json;

// ---------------------------------------------------------------- config

ModelConfig model_from_toml(const TomlTable& t) {
  ModelConfig c;
  c.d1 = int(toml_int_or(t, "model.d1", c.d1));
  c.d2 = int(toml_int_or(t, "model.d2", c.d2));
  c.D = int(toml_int_or(t, "model.D", c.D));
  c.d = int(toml_int_or(t, "model.d", c.d));
  c.K = int(toml_int_or(t, "model.K", c.K));
  c.ff_expansion = int(toml_int_or(t, "model.ff_expansion", c.ff_expansion));
  const std::int64_t variant = toml_int_or(t, "model.variant", 2);
  if (variant < 1 || variant > 3)
    throw input_error("config: model.variant must be 1, 2 or 3");
  c.variant = static_cast<ArchVariant>(variant);
  const std::string bn = toml_str_or(t, "model.bottleneck", "cs");
  if (bn == "cs")
    c.bottleneck = BottleneckKind::cs;
  else if (bn == "ae")
    c.bottleneck = BottleneckKind::ae;
  else
    throw input_error("config: model.bottleneck must be \"cs\" or \"ae\"");
  c.patch_norm = toml_bool_or(t, "model.patch_norm", false);
  c.seed = std::uint64_t(toml_int_or(t, "model.seed", 1));
  c.validate();
  return c;
}

TrainConfig train_from_toml(const TomlTable& t) {
  static const std::set<std::string> known = {
      "model.d1",          "model.d2",         "model.D",
      "model.d",           "model.K",          "model.ff_expansion",
      "model.variant",     "model.bottleneck", "model.patch_norm",
      "model.seed",        "loss.lambda_kl",   "loss.lambda_lpips",
      "loss.lambda_adv",   "loss.recon_rgb",   "loss.recon_freq",
      "optim.lr",          "optim.beta1",      "optim.beta2",
      "optim.eps",         "optim.warmup_steps", "optim.lr_floor",
      "optim.clip_norm",   "train.steps",      "train.batch",
      "train.frames",      "train.height",     "train.width",
      "train.data_seed",   "train.corpus_clips", "train.holdout_clips",
      "train.log_every",   "train.ckpt_every", "train.eval_every",
      "train.out_dir"};
  for (const auto& [key, value] : t) {
    (void)value;
    if (!known.count(key))
      throw input_error("config: unknown key '" + key + "'");
  }

  TrainConfig tc;
  tc.model = model_from_toml(t);
  tc.loss.lambda_kl = toml_num_or(t, "loss.lambda_kl", tc.loss.lambda_kl);
  tc.loss.lambda_lpips = toml_num_or(t, "loss.lambda_lpips", 0.0);
  tc.loss.lambda_adv = toml_num_or(t, "loss.lambda_adv", 0.0);
  tc.loss.recon_rgb = toml_bool_or(t, "loss.recon_rgb", true);
  tc.loss.recon_freq = toml_bool_or(t, "loss.recon_freq", true);
  tc.opt.lr = toml_num_or(t, "optim.lr", tc.opt.lr);
  tc.opt.beta1 = toml_num_or(t, "optim.beta1", tc.opt.beta1);
  tc.opt.beta2 = toml_num_or(t, "optim.beta2", tc.opt.beta2);
  tc.opt.eps = toml_num_or(t, "optim.eps", tc.opt.eps);
  tc.opt.warmup_steps = toml_int_or(t, "optim.warmup_steps", 100);
  tc.opt.lr_floor = toml_num_or(t, "optim.lr_floor", tc.opt.lr_floor);
  tc.clip_norm = toml_num_or(t, "optim.clip_norm", tc.clip_norm);
  tc.steps = toml_int_or(t, "train.steps", tc.steps);
  tc.batch = toml_int_or(t, "train.batch", tc.batch);
  tc.clip.frames = toml_int_or(t, "train.frames", tc.clip.frames);
  tc.clip.height = toml_int_or(t, "train.height", tc.clip.height);
  tc.clip.width = toml_int_or(t, "train.width", tc.clip.width);
  tc.data_seed = std::uint64_t(toml_int_or(t, "train.data_seed", 42));
  tc.corpus_clips = toml_int_or(t, "train.corpus_clips", tc.corpus_clips);
  tc.holdout_clips = toml_int_or(t, "train.holdout_clips", tc.holdout_clips);
  tc.log_every = toml_int_or(t, "train.log_every", tc.log_every);
  tc.ckpt_every = toml_int_or(t, "train.ckpt_every", tc.ckpt_every);
  tc.eval_every = toml_int_or(t, "train.eval_every", tc.eval_every);
  tc.out_dir = toml_str_or(t, "train.out_dir", "");
  tc.opt.total_steps = tc.steps;
  if (tc.steps < 1 || tc.batch < 1)
    throw input_error("config: train.steps and train.batch must be >= 1");
  return tc;
}

void parse_shape(const std::string& s, std::int64_t& frames, std::int64_t& h,
                 std::int64_t& w) {
  long f = 0, hh = 0, ww = 0;
  if (std::sscanf(s.c_str(), "%ldx%ldx%ld", &f, &hh, &ww) != 3 || f < 1 ||
      hh < 1 || ww < 1)
    throw input_error("--shape must look like 17x768x768");
  frames = f;
  h = hh;
  w = ww;
}

json psnr_json(double v) {
  if (std::isinf(v)) return json("inf");
  return json(v);
}

// --------------------------------------------------------------- commands

int cmd_encode(const std::string& input, const std::string& model_path,
               const std::string& out, std::int64_t chunk) {
  auto model = Autoencoder<float>::load(model_path);
  auto video = lvid_to_tensor<float>(read_lvid(input));
  Tensor<float> z;
  if (chunk > 0) {
    if (chunk < 5 || chunk % 4 != 1)
      throw input_error("--chunk must be 1 (mod 4) and at least 5");
    StreamState<float> ss;
    z = concat_all_axis0(
        stream_encode(model, split_video(video, chunk, chunk - 1), ss));
  } else {
    z = model.encode(video).z;
  }
  write_ntsr_file(out, z);
  std::cout << json{{"latent_shape", z.shape()}, {"out", out}}.dump() << "\n";
  return 0;
}

int cmd_decode(const std::string& input, const std::string& model_path,
               const std::string& out, std::int64_t chunk) {
  auto model = Autoencoder<float>::load(model_path);
  Tensor<float> z = read_ntsr_file<float>(input);
  if (z.ndim() != 4 || z.shape().back() != model.config().d)
    throw config_error("decode: latent " + shape_str(z.shape()) +
                       " does not match the model's " +
                       std::to_string(model.config().d) + " channels");
  Tensor<float> video;
  if (chunk > 0) {
    if (chunk < 5 || chunk % 4 != 1)
      throw input_error("--chunk must be 1 (mod 4) and at least 5");
    const std::int64_t rows = 1 + (chunk - 1) / 4;
    StreamState<float> ss;
    video = concat_all_axis0(
        stream_decode(model, split_rows(z, rows, rows - 1), ss));
  } else {
    video = model.decode(z);
  }
  write_lvid(out, tensor_to_lvid(video));
  std::cout << json{{"video_shape", video.shape()}, {"out", out}}.dump()
            << "\n";
  return 0;
}

int cmd_roundtrip(const std::string& input, const std::string& model_path,
                  const std::string& report, std::int64_t chunk) {
  auto model = Autoencoder<float>::load(model_path);
  auto video = lvid_to_tensor<float>(read_lvid(input));
  const auto t0 = std::chrono::steady_clock::now();
  Tensor<float> z;
  if (chunk > 0) {
    StreamState<float> ss;
    z = concat_all_axis0(
        stream_encode(model, split_video(video, chunk, chunk - 1), ss));
  } else {
    z = model.encode(video).z;
  }
  Tensor<float> back = model.decode(z);
  const auto t1 = std::chrono::steady_clock::now();
  const double ms =
      std::chrono::duration_cast<std::chrono::microseconds>(t1 - t0).count() /
      1000.0;
  json rep = {{"psnr", psnr_json(psnr(video, back))},
              {"ssim", ssim(video, back)},
              {"latent_shape", z.shape()},
              {"wall_time_ms", ms}};
  if (!report.empty()) {
    std::ofstream f(report);
    if (!f) throw io_error("cannot open report file: " + report);
    f << rep.dump(2) << "\n";
  }
  std::cout << rep.dump() << "\n";
  return 0;
}

int cmd_train(const std::string& config_path) {
  TrainConfig tc = train_from_toml(parse_toml_file(config_path));
  Trainer<float> tr(tc);
  const auto last = tr.run();
  json out = {{"steps", tc.steps},
              {"final_total", last.total},
              {"final_rgb", last.rgb},
              {"final_freq", last.freq},
              {"holdout_psnr", psnr_json(tr.holdout_psnr())}};
  if (!tc.out_dir.empty()) out["checkpoint"] = tc.out_dir + "/ckpt_final.ntsa";
  std::cout << out.dump() << "\n";
  return 0;
}

int cmd_flops(const std::string& config_path, const std::string& shape) {
  ModelConfig cfg;
  if (!config_path.empty())
    cfg = model_from_toml(parse_toml_file(config_path));
  std::int64_t frames, h, w;
  parse_shape(shape, frames, h, w);
  const CostReport rep = cost_model(cfg, frames, h, w);
  json out = rep.to_json();
  out["input_shape"] = {frames, h, w};
  out["config"] = config_to_json(cfg);
  std::cout << out.dump() << "\n";
  return 0;
}

int cmd_init_model(const std::string& config_path, const std::string& out) {
  ModelConfig cfg;
  if (!config_path.empty())
    cfg = model_from_toml(parse_toml_file(config_path));
  Autoencoder<float> m(cfg);
  m.save(out);
  std::cout << json{{"out", out}, {"params", m.param_count()}}.dump() << "\n";
  return 0;
}

int cmd_synth(const std::string& out, std::int64_t frames, std::int64_t size,
              std::uint64_t seed) {
  auto clip = synth_clip<float>({frames, size, size}, seed, 0);
  write_lvid(out, tensor_to_lvid(clip));
  std::cout << json{{"out", out}, {"shape", clip.shape()}}.dump() << "\n";
  return 0;
}

// --------------------------------------------------------------- selftest

int cmd_selftest() {
  int failures = 0;
  auto report = [&](const char* name, bool ok) {
    std::cerr << (ok ? "[ok]   " : "[FAIL] ") << name << "\n";
    if (!ok) ++failures;
  };
  Rng rng(1234);

  {  // wavelet roundtrips + energy preservation
    bool ok = true;
    for (int i = 0; i < 50 && ok; ++i) {
      Tensor<float> x({4, 8, 8, 3});
      for (std::int64_t j = 0; j < x.numel(); ++j)
        x[j] = float(rng.uniform(-1, 1));
      auto p = dwt3_packed(x);
      ok = max_abs_diff(idwt3_packed(p), x) < 1e-6;
      double ex = 0, ep = 0;
      for (std::int64_t j = 0; j < x.numel(); ++j) ex += double(x[j]) * x[j];
      for (std::int64_t j = 0; j < p.numel(); ++j) ep += double(p[j]) * p[j];
      ok = ok && std::fabs(ex - ep) / ex < 1e-5;
    }
    report("wavelet roundtrip + energy", ok);
  }

  ModelConfig cfg;
  cfg.d1 = 8;
  cfg.d2 = 24;
  cfg.D = 32;
  cfg.seed = 7;
  Autoencoder<float> m(cfg);

  {  // causality
    bool ok = true;
    Tensor<float> x({17, 16, 16, 3});
    for (std::int64_t j = 0; j < x.numel(); ++j)
      x[j] = float(rng.uniform(-1, 1));
    auto z = m.encode(x).z;
    for (int trial = 0; trial < 10 && ok; ++trial) {
      const std::int64_t t = std::int64_t(rng.next_u64() % 4);
      Tensor<float> x2 = x;
      for (std::int64_t j = (4 * t + 1) * 16 * 16 * 3; j < x2.numel(); ++j)
        x2[j] = float(rng.uniform(-1, 1));
      auto z2 = m.encode(x2).z;
      for (std::int64_t j = 0; j < (t + 1) * 2 * 2 * 4 && ok; ++j)
        ok = z[j] == z2[j];
    }
    report("temporal causality (encode)", ok);
  }

  {  // tiling equivalence
    Tensor<float> x({17, 16, 16, 3});
    for (std::int64_t j = 0; j < x.numel(); ++j)
      x[j] = float(rng.uniform(-1, 1));
    auto full = m.encode(x).z;
    StreamState<float> ss;
    auto z = concat_all_axis0(stream_encode(m, split_video(x, 5, 4), ss));
    bool ok = max_abs_diff(full, z) < 1e-5;
    StreamState<float> ds;
    auto y = concat_all_axis0(stream_decode(m, split_rows(full, 2, 1), ds));
    ok = ok && max_abs_diff(m.decode(full), y) < 1e-5;
    report("lossless tiling equivalence", ok);
  }

  {  // gradient checks on core primitives (f64 central differences)
    auto fd_ok = [&](auto&& eval, Tensor<double>& param, double tol) {
      ad::Tape<double> tape;
      auto v = tape.param(param);
      auto loss = eval(tape, v);
      tape.backward(loss);
      auto g = tape.grad(v);
      const double eps = 1e-5;
      for (int probe = 0; probe < 6; ++probe) {
        const std::int64_t i =
            std::int64_t(rng.next_u64() % std::uint64_t(param.numel()));
        const double x0 = param[i];
        param[i] = x0 + eps;
        ad::Tape<double> tp;
        auto vp = tp.param(param);
        const double fp = eval(tp, vp).value()[0];
        param[i] = x0 - eps;
        ad::Tape<double> tm;
        auto vm = tm.param(param);
        const double fm = eval(tm, vm).value()[0];
        param[i] = x0;
        const double fd = (fp - fm) / (2 * eps);
        if (std::fabs(fd - g[i]) /
                std::max({std::fabs(fd), std::fabs(g[i]), 1e-6}) >
            tol)
          return false;
      }
      return true;
    };
    Rng r2(55);
    Tensor<double> w({6, 8});
    for (std::int64_t j = 0; j < w.numel(); ++j) w[j] = r2.uniform(-1, 1);
    Tensor<double> xc({4, 6});
    for (std::int64_t j = 0; j < xc.numel(); ++j) xc[j] = r2.uniform(-1, 1);
    bool ok = fd_ok(
        [&](ad::Tape<double>& t, ad::Var<double> v) {
          return mean_scalar(gelu(matmul_lastdim(t.constant(xc), v)));
        },
        w, 1e-4);
    Tensor<double> kk({3, 3, 3, 2});
    for (std::int64_t j = 0; j < kk.numel(); ++j) kk[j] = r2.uniform(-1, 1);
    Tensor<double> xv({3, 3, 3, 2});
    for (std::int64_t j = 0; j < xv.numel(); ++j) xv[j] = r2.uniform(-1, 1);
    ok = ok && fd_ok(
                   [&](ad::Tape<double>& t, ad::Var<double> v) {
                     auto b = t.constant(Tensor<double>({2}));
                     auto y = dwconv3d_causal(t.constant(xv), v, b);
                     return mean_scalar(mul(y, y));
                   },
                   kk, 1e-4);
    report("gradient checks", ok);
  }

  std::cout << json{{"selftest", failures == 0 ? "ok" : "failed"},
                    {"failures", failures}}
                   .dump()
            << "\n";
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"causal video autoencoder: wavelet patchify, NAF backbone, "
               "compressed-sensing channel bottleneck"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (0 = hardware)");

  std::string input, model_path, out, report, config_path, shape;
  std::int64_t chunk = 0;
  std::int64_t frames = 17, size = 64;
  std::uint64_t seed = 1;

  auto* enc = app.add_subcommand("encode", "LVID video -> NTSR latent");
  enc->add_option("--input", input)->required();
  enc->add_option("--model", model_path)->required();
  enc->add_option("--out", out)->required();
  enc->add_option("--chunk", chunk,
                  "frames per chunk (1 mod 4) for cached streaming");

  auto* dec = app.add_subcommand("decode", "NTSR latent -> LVID video");
  dec->add_option("--input", input)->required();
  dec->add_option("--model", model_path)->required();
  dec->add_option("--out", out)->required();
  dec->add_option("--chunk", chunk,
                  "frames per chunk (1 mod 4) for cached streaming");

  auto* rt =
      app.add_subcommand("roundtrip", "encode+decode with a quality report");
  rt->add_option("--input", input)->required();
  rt->add_option("--model", model_path)->required();
  rt->add_option("--report", report, "also write the JSON report here");
  rt->add_option("--chunk", chunk);

  auto* tr =
      app.add_subcommand("train", "run a training loop from a TOML config");
  tr->add_option("--config", config_path)->required();

  auto* fl = app.add_subcommand("flops", "analytic parameter/FLOP report");
  fl->add_option("--config", config_path);
  fl->add_option("--shape", shape, "input shape TxHxW, e.g. 17x768x768")
      ->required();

  auto* in =
      app.add_subcommand("init-model", "write a freshly seeded checkpoint");
  in->add_option("--config", config_path);
  in->add_option("--out", out)->required();

  auto* sy = app.add_subcommand("synth", "write a synthetic LVID clip");
  sy->add_option("--out", out)->required();
  sy->add_option("--frames", frames);
  sy->add_option("--size", size);
  sy->add_option("--seed", seed);

  auto* st = app.add_subcommand("selftest",
                                "wavelet/causality/tiling/gradient suites");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  if (threads > 0) set_threads(threads);

  try {
    if (enc->parsed()) return cmd_encode(input, model_path, out, chunk);
    if (dec->parsed()) return cmd_decode(input, model_path, out, chunk);
    if (rt->parsed()) return cmd_roundtrip(input, model_path, report, chunk);
    if (tr->parsed()) return cmd_train(config_path);
    if (fl->parsed()) return cmd_flops(config_path, shape);
    if (in->parsed()) return cmd_init_model(config_path, out);
    if (sy->parsed()) return cmd_synth(out, frames, size, seed);
    if (st->parsed()) return cmd_selftest();
  } catch (const input_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const shape_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const config_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

#include "vvae/train/trainer.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "vvae/kernels/kernels.hpp"
#include "vvae/metrics/quality.hpp"

namespace vvae {

template <typename T>
Trainer<T>::Trainer(const TrainConfig& cfg)
    : Trainer(cfg, Autoencoder<T>(cfg.model)) {}

template <typename T>
Trainer<T>::Trainer(const TrainConfig& cfg, Autoencoder<T> model)
    : cfg_(cfg),
      model_(std::move(model)),
      opt_(model_.weights(), cfg.opt),
      noise_rng_(Rng(cfg.data_seed).fork(0x6e6f697365)),
      data_rng_(Rng(cfg.data_seed).fork(0x64617461)) {
  if (cfg_.loss.lambda_lpips != 0.0 && !hooks_.lpips)
    throw config_error("training: lambda_lpips set but no hook bound");
  if (cfg_.loss.lambda_adv != 0.0 && !hooks_.adv)
    throw config_error("training: lambda_adv set but no hook bound");
}

template <typename T>
Tensor<T> Trainer<T>::train_clip(std::int64_t index) const {
  return synth_clip<T>(cfg_.clip, cfg_.data_seed, index);
}

template <typename T>
Tensor<T> Trainer<T>::holdout_clip(std::int64_t i) const {
  return synth_clip<T>(cfg_.clip, cfg_.data_seed, cfg_.corpus_clips + i);
}

template <typename T>
StepStats Trainer<T>::train_step(const std::vector<Tensor<T>>& batch) {
  if (batch.empty()) throw input_error("train_step: empty batch");
  if (cfg_.loss.lambda_lpips != 0.0 && !hooks_.lpips)
    throw config_error("training: lambda_lpips set but no hook bound");
  if (cfg_.loss.lambda_adv != 0.0 && !hooks_.adv)
    throw config_error("training: lambda_adv set but no hook bound");

  ad::Tape<T> tape;
  ModelWeights<ad::Var<T>> wv = lift(tape, model_.weights(), cfg_.model);
  const bool sampling = cfg_.model.bottleneck == BottleneckKind::cs;

  StepStats stats;
  ad::Var<T> total;
  bool have = false;
  for (const Tensor<T>& clip : batch) {
    ad::Var<T> x = tape.constant(clip);
    PatchEmb<ad::Var<T>> emb = patchify(x, wv.patch, cfg_.model);
    ad::Var<T> p = encoder_forward(emb, wv.enc);
    LatentHeads<ad::Var<T>> heads = sense(p, wv.bneck, sampling, &noise_rng_);
    ad::Var<T> phat = recover(heads.z, wv.bneck);
    PatchEmb<ad::Var<T>> demb = decoder_forward(phat, wv.dec);
    ad::Var<T> xhat = unpatchify(demb, wv.patch, cfg_.model);
    LossTerms<ad::Var<T>> terms = assemble_loss(x, xhat, &heads, cfg_.loss);

    ad::Var<T> clip_total = terms.total;
    if (hooks_.lpips && cfg_.loss.lambda_lpips != 0.0)
      clip_total = add(clip_total, scale(hooks_.lpips(x, xhat),
                                         T(cfg_.loss.lambda_lpips)));
    if (hooks_.adv && cfg_.loss.lambda_adv != 0.0)
      clip_total = add(clip_total,
                       scale(hooks_.adv(x, xhat), T(cfg_.loss.lambda_adv)));

    total = have ? add(total, clip_total) : clip_total;
    have = true;
    const double inv = 1.0 / double(batch.size());
    if (terms.has_rgb) stats.rgb += double(terms.rgb.value()[0]) * inv;
    if (terms.has_freq) stats.freq += double(terms.freq.value()[0]) * inv;
    if (terms.has_kl) stats.kl += double(terms.kl.value()[0]) * inv;
  }
  total = scale(total, T(1.0 / double(batch.size())));
  stats.total = double(total.value()[0]);
  if (!std::isfinite(stats.total))
    throw std::runtime_error(
        "training: non-finite loss (total=" + std::to_string(stats.total) +
        ", rgb=" + std::to_string(stats.rgb) +
        ", freq=" + std::to_string(stats.freq) +
        ", kl=" + std::to_string(stats.kl) + ")");

  tape.backward(total);

  std::vector<Tensor<T>> grads;
  wv.for_each([&](const std::string&, ad::Var<T>& v) {
    grads.push_back(tape.grad(v));
  });

  double sq = 0.0;
  const auto& K = kern::ops<T>();
  for (const auto& g : grads)
    sq += K.sum_sq(g.data(), std::size_t(g.numel()));
  stats.grad_norm = std::sqrt(sq);
  if (!std::isfinite(stats.grad_norm))
    throw std::runtime_error("training: non-finite gradient norm");
  if (cfg_.clip_norm > 0.0 && stats.grad_norm > cfg_.clip_norm) {
    const T s = T(cfg_.clip_norm / stats.grad_norm);
    for (auto& g : grads)
      K.scale(g.data(), g.data(), s, std::size_t(g.numel()));
    stats.clipped = true;
  }
  stats.lr = opt_.step(model_.weights(), grads);
  return stats;
}

template <typename T>
double Trainer<T>::holdout_psnr() const {
  if (cfg_.holdout_clips < 1)
    throw config_error("holdout_psnr: no holdout clips configured");
  double acc = 0.0;
  for (std::int64_t i = 0; i < cfg_.holdout_clips; ++i) {
    const Tensor<T> x = holdout_clip(i);
    const Tensor<T> xh = model_.decode(model_.encode(x).z);
    acc += psnr(x, xh);
  }
  return acc / double(cfg_.holdout_clips);
}

template <typename T>
StepStats Trainer<T>::run() {
  namespace fs = std::filesystem;
  std::ofstream log;
  const bool files = !cfg_.out_dir.empty();
  if (files) {
    std::error_code ec;
    fs::create_directories(cfg_.out_dir, ec);
    if (ec)
      throw io_error("training: cannot create output dir '" + cfg_.out_dir +
                     "': " + ec.message());
    log.open(cfg_.out_dir + "/metrics.jsonl");
    if (!log) throw io_error("training: cannot open metrics log");
  }

  auto emit = [&](std::int64_t step, const StepStats& s, bool with_eval) {
    if (!files) return;
    nlohmann::json row = {{"step", step},          {"lr", s.lr},
                          {"total", s.total},      {"rgb", s.rgb},
                          {"freq", s.freq},        {"kl", s.kl},
                          {"grad_norm", s.grad_norm}, {"clipped", s.clipped}};
    if (with_eval) row["holdout_psnr"] = holdout_psnr();
    log << row.dump() << '\n';
    log.flush();
    if (!log) throw io_error("training: metrics log write failed");
  };

  StepStats last;
  for (std::int64_t step = 0; step < cfg_.steps; ++step) {
    std::vector<Tensor<T>> batch;
    batch.reserve(std::size_t(cfg_.batch));
    for (std::int64_t b = 0; b < cfg_.batch; ++b) {
      const std::int64_t idx =
          std::int64_t(data_rng_.next_u64() % std::uint64_t(cfg_.corpus_clips));
      batch.push_back(train_clip(idx));
    }
    last = train_step(batch);
    const bool is_last = step + 1 == cfg_.steps;
    const bool log_now =
        is_last || (cfg_.log_every > 0 && (step + 1) % cfg_.log_every == 0);
    const bool eval_now =
        is_last || (cfg_.eval_every > 0 && (step + 1) % cfg_.eval_every == 0);
    if (log_now) emit(step + 1, last, eval_now);
    if (files && cfg_.ckpt_every > 0 && (step + 1) % cfg_.ckpt_every == 0)
      model_.save(cfg_.out_dir + "/ckpt_" + std::to_string(step + 1) + ".ntsa");
  }
  if (files) model_.save(cfg_.out_dir + "/ckpt_final.ntsa");
  return last;
}

template class Trainer<float>;
template class Trainer<double>;

}  // namespace vvae

#pragma once

#include <string>
#include <vector>

#include "vvae/model/autoencoder.hpp"
#include "vvae/train/loss.hpp"
#include "vvae/train/optimizer.hpp"
#include "vvae/train/synthetic.hpp"

namespace vvae {

struct TrainConfig {
  ModelConfig model;
  LossWeights loss;
  AdamConfig opt;
  double clip_norm = 1.0;  // global-norm gradient clip; <= 0 disables
  std::int64_t steps = 200;
  std::int64_t batch = 2;
  ClipSpec clip;
  std::uint64_t data_seed = 42;
  std::int64_t corpus_clips = 256;  // training draws from [0, corpus_clips)
  std::int64_t holdout_clips = 8;   // indices corpus_clips..+holdout
  std::int64_t log_every = 25;
  std::int64_t ckpt_every = 0;  // 0: final checkpoint only
  std::int64_t eval_every = 0;  // 0: final eval only
  std::string out_dir;          // empty: no files written
};

struct StepStats {
  double total = 0, rgb = 0, freq = 0, kl = 0;
  double grad_norm = 0, lr = 0;
  bool clipped = false;
};

// One loop owns the model; batches run on a single tape per step and the
// update is a bias-corrected Adam step after global-norm clipping.
template <typename T>
class Trainer {
 public:
  explicit Trainer(const TrainConfig& cfg);
  Trainer(const TrainConfig& cfg, Autoencoder<T> model);

  Autoencoder<T>& model() { return model_; }
  const TrainConfig& config() const { return cfg_; }
  LossHooks<T>& hooks() { return hooks_; }

  Tensor<T> train_clip(std::int64_t index) const;
  Tensor<T> holdout_clip(std::int64_t i) const;

  StepStats train_step(const std::vector<Tensor<T>>& batch);
  double holdout_psnr() const;

  // Full run: draws batches, logs JSON lines, writes checkpoints.
  // Returns the final step's stats.
  StepStats run();

 private:
  TrainConfig cfg_;
  Autoencoder<T> model_;
  Adam<T> opt_;
  Rng noise_rng_;
  Rng data_rng_;
  LossHooks<T> hooks_;
};

}  // namespace vvae

#pragma once

#include <string>

#include "vvae/model/bottleneck.hpp"
#include "vvae/model/patchifier.hpp"

namespace vvae {

template <typename T>
struct LatentGrid {
  Tensor<T> z;
  Tensor<T> mu, logvar;  // populated on the CS/VAE path only
  bool has_stats = false;
};

enum class EncodeMode { train, infer };

// Full assembly: patchify -> encoder -> sense on the way in,
// recover -> decoder -> unpatchify on the way out. A constructed model is
// immutable during encode/decode and safe to share across threads; training
// mutates its weights through weights().
template <typename T>
class Autoencoder {
 public:
  explicit Autoencoder(const ModelConfig& cfg);
  Autoencoder(const ModelConfig& cfg, ModelWeights<Tensor<T>> w);

  const ModelConfig& config() const { return cfg_; }
  ModelWeights<Tensor<T>>& weights() const { return w_; }
  std::int64_t param_count() const;

  // x: [1+T, H, W, 3], values in [-1, 1]. train mode draws the latent via
  // the reparameterized sampler (CS path) and needs an rng.
  LatentGrid<T> encode(const Tensor<T>& x, EncodeMode mode = EncodeMode::infer,
                       Rng* rng = nullptr) const;
  Tensor<T> decode(const Tensor<T>& z) const;

  // Streaming chunks. The first chunk carries the leading frame; follow-ups
  // are video-only. State must be visited in chunk order.
  LatentGrid<T> encode_chunk(const Tensor<T>& chunk, StreamState<T>& ss) const;
  Tensor<T> decode_chunk(const Tensor<T>& z, StreamState<T>& ss) const;

  // Checkpoint archive: header, JSON manifest (config + name -> offset,
  // shape, dtype), then one NTSR record per parameter.
  void save(const std::string& path) const;
  static Autoencoder load(const std::string& path);

 private:
  ModelConfig cfg_;
  mutable ModelWeights<Tensor<T>> w_;  // for_each is non-const
};

}  // namespace vvae

#pragma once

#include <vector>

#include "vvae/core/tensor.hpp"
#include "vvae/model/weights.hpp"

namespace vvae {

struct AdamConfig {
  double lr = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.9;
  double eps = 1e-8;
  std::int64_t warmup_steps = 100;
  double lr_floor = 2e-5;
  std::int64_t total_steps = 1000;  // cosine horizon
};

// Bias-corrected Adam with linear warmup and cosine decay to lr_floor.
// Moment buffers follow the for_each parameter order.
template <typename T>
class Adam {
 public:
  Adam(ModelWeights<Tensor<T>>& w, AdamConfig cfg);

  double lr_at(std::int64_t step) const;  // 0-based step index
  std::int64_t steps_done() const { return step_; }

  // grads must be in for_each order; returns the learning rate applied.
  double step(ModelWeights<Tensor<T>>& w, const std::vector<Tensor<T>>& grads);

 private:
  AdamConfig cfg_;
  std::vector<Tensor<T>> m_, v_;
  std::int64_t step_ = 0;
};

}  // namespace vvae

#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "vvae/model/config.hpp"

// Analytic parameter and FLOP accounting. Multiply-accumulate counts as one
// FLOP (the convention FLOP-counter tooling reports); elementwise transforms
// count one per element. Parameter counts must agree exactly with the live
// model's enumeration.

namespace vvae {

struct ModuleCost {
  std::string name;
  std::int64_t params = 0;
  double flops_encode = 0.0;
  double flops_decode = 0.0;
};

struct CostReport {
  std::vector<ModuleCost> modules;
  std::int64_t total_params = 0;
  double flops_encode = 0.0;
  double flops_decode = 0.0;
  double flops_total = 0.0;
  nlohmann::json to_json() const;
};

// frames = 1 + T; the shape must satisfy the divisibility rules.
CostReport cost_model(const ModelConfig& cfg, std::int64_t frames,
                      std::int64_t H, std::int64_t W);

}  // namespace vvae

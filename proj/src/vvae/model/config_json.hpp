#pragma once

#include <json.hpp>

#include "vvae/model/config.hpp"

namespace vvae {

inline nlohmann::json config_to_json(const ModelConfig& c) {
  return {{"d1", c.d1},
          {"d2", c.d2},
          {"D", c.D},
          {"d", c.d},
          {"K", c.K},
          {"ff_expansion", c.ff_expansion},
          {"variant", static_cast<int>(c.variant)},
          {"bottleneck", c.bottleneck == BottleneckKind::cs ? "cs" : "ae"},
          {"patch_norm", c.patch_norm},
          {"seed", c.seed}};
}

inline ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  try {
    c.d1 = j.at("d1").get<int>();
    c.d2 = j.at("d2").get<int>();
    c.D = j.at("D").get<int>();
    c.d = j.at("d").get<int>();
    c.K = j.at("K").get<int>();
    c.ff_expansion = j.at("ff_expansion").get<int>();
    const int v = j.at("variant").get<int>();
    if (v < 1 || v > 3) throw config_error("config: variant must be 1..3");
    c.variant = static_cast<ArchVariant>(v);
    const std::string b = j.at("bottleneck").get<std::string>();
    if (b == "cs")
      c.bottleneck = BottleneckKind::cs;
    else if (b == "ae")
      c.bottleneck = BottleneckKind::ae;
    else
      throw config_error("config: bottleneck must be cs or ae");
    c.patch_norm = j.at("patch_norm").get<bool>();
    c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace vvae

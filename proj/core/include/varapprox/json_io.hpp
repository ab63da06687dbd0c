#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "varapprox/analysis.hpp"
#include "varapprox/flowar.hpp"
#include "varapprox/nn.hpp"
#include "varapprox/tensor.hpp"
#include "varapprox/var_model.hpp"

namespace varapprox {

using Json = nlohmann::json;

/// Finite values as numbers; infinities and NaN as the strings "inf", "-inf", "nan".
Json json_number(double x);

// Literal forms. Readers throw ConfigError whose path starts at `path`.

/// {"rows": r, "cols": c, "data": [r*c values, row-major]}
Json to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j, const std::string& path = "$");

/// {"h": h, "w": w, "d": d, "data": [h*w*d values]}
Json to_json(const TokenMap& t);
TokenMap token_map_from_json(const Json& j, const std::string& path = "$");

/// {"w_q", "w_k", "w_v", optional "w_o"}
Json to_json(const AttnParams& p);
AttnParams attn_from_json(const Json& j, const std::string& path = "$");

/// {"w1", "b1", "w2", "b2"}
Json to_json(const FfnParams& p);
FfnParams ffn_from_json(const Json& j, const std::string& path = "$");

/// {"kind": "identity" | "affine" | "layer_norm", "w", "b", "ln_eps"}
Json to_json(const TokenwiseMap& g);
TokenwiseMap tokenwise_from_json(const Json& j, const std::string& path = "$");

/// {"mod_w", "mod_b", "attn", "out_w", "out_b", "ln_eps"}
Json to_json(const FlowMatchParams& p);
FlowMatchParams flow_match_from_json(const Json& j, const std::string& path = "$");

Json to_json(const SeparationReport& r);
Json to_json(const ContextualReport& r);
Json to_json(const BoundReport& r);

/// VAR demo configuration.
///
///   {"schedule": [[1,1],[2,2],[4,4]], "d": 2, "head_size": 2, "hidden": 4,
///    "kernel": "cubic_bspline", "stencil": "fractional", "order": "ffn_attn_up",
///    "param_seed": 3, "levels": [...], "x_init": {...}}
///
/// Parameters not given explicitly are drawn from the run seed (or param_seed).
struct VarDemoConfig {
  ScaleSchedule schedule;
  std::size_t head_size = 0;  // 0 means d
  std::size_t hidden = 4;
  InterpOptions interp;
  BlockOrder order = BlockOrder::kFfnAttnUp;
  std::optional<std::uint64_t> param_seed;
  std::optional<std::vector<VarLevelParams>> levels;
  std::optional<TokenMap> x_init;
};

VarDemoConfig var_config_from_json(const Json& j);

/// FlowAR demo configuration.
///
///   {"scales": 2, "base": 2, "h": 2, "w": 2, "c": 1, "hidden": 4, "steps": 8,
///    "kernel": "cubic_bspline", "stencil": "fractional", "param_seed": 5,
///    "tf": [{"attn": ..., "ffn": ...}], "nn": [...], "z_init": {...}}
struct FlowArDemoConfig {
  std::size_t scales = 1;
  std::size_t base = 2;
  std::size_t h = 1;
  std::size_t w = 1;
  std::size_t c = 1;
  std::size_t hidden = 4;
  std::size_t steps = 8;
  InterpOptions interp;
  std::optional<std::uint64_t> param_seed;
  std::optional<std::vector<ArScaleParams>> tf;
  std::optional<std::vector<FlowMatchParams>> nn;
  std::optional<TokenMap> z_init;
};

FlowArDemoConfig flowar_config_from_json(const Json& j);

/// Parses a file; throws ConfigError("$", ...) when it is missing or not JSON.
Json read_json_file(const std::string& path);

}  // namespace varapprox

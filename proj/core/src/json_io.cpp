#include "varapprox/json_io.hpp"

#include <cmath>
#include <fstream>

#include "varapprox/error.hpp"

namespace varapprox {

namespace {

const Json& field(const Json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw ConfigError(path + "." + key, "missing field");
  return *it;
}

const Json* optional_field(const Json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  const auto it = j.find(key);
  return it == j.end() || it->is_null() ? nullptr : &*it;
}

std::size_t as_count(const Json& j, const std::string& path, bool allow_zero = false) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) {
    throw ConfigError(path, "expected a non-negative integer");
  }
  const auto v = j.get<std::int64_t>();
  if (v < 0 || (!allow_zero && v == 0)) {
    throw ConfigError(path, allow_zero ? "expected a non-negative integer"
                                       : "expected a positive integer");
  }
  return static_cast<std::size_t>(v);
}

std::uint64_t as_seed(const Json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
    throw ConfigError(path, "expected an unsigned integer seed");
  }
  return j.get<std::uint64_t>();
}

double as_real(const Json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path, "expected a finite number");
  return v;
}

std::string as_string(const Json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

std::vector<double> as_reals(const Json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t k = 0; k < j.size(); ++k) {
    out.push_back(as_real(j[k], path + "[" + std::to_string(k) + "]"));
  }
  return out;
}

Json reals(std::span<const double> xs) {
  Json a = Json::array();
  for (double x : xs) a.push_back(json_number(x));
  return a;
}

template <typename F>
auto parse_list(const Json& j, const std::string& path, F&& one) {
  if (!j.is_array()) throw ConfigError(path, "expected an array");
  std::vector<decltype(one(j, path))> out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    out.push_back(one(j[k], path + "[" + std::to_string(k) + "]"));
  }
  return out;
}

// Wraps library validation so shape errors carry the config path.
template <typename F>
void validated(const std::string& path, F&& check) {
  try {
    check();
  } catch (const ShapeError& e) {
    throw ConfigError(path, e.what());
  }
}

InterpOptions interp_from(const Json& j) {
  InterpOptions o;
  try {
    if (const Json* k = optional_field(j, "kernel", "$")) {
      o.kernel = kernel_from_string(as_string(*k, "$.kernel"));
    }
  } catch (const DomainError& e) {
    throw ConfigError("$.kernel", e.what());
  }
  try {
    if (const Json* s = optional_field(j, "stencil", "$")) {
      o.mode = stencil_from_string(as_string(*s, "$.stencil"));
    }
  } catch (const DomainError& e) {
    throw ConfigError("$.stencil", e.what());
  }
  return o;
}

}  // namespace

Json json_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

Json to_json(const Matrix& m) {
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", reals(m.data())}};
}

Matrix matrix_from_json(const Json& j, const std::string& path) {
  const std::size_t rows = as_count(field(j, "rows", path), path + ".rows");
  const std::size_t cols = as_count(field(j, "cols", path), path + ".cols");
  auto data = as_reals(field(j, "data", path), path + ".data");
  if (data.size() != rows * cols) {
    throw ConfigError(path + ".data", "expected " + std::to_string(rows * cols) +
                                          " values, got " + std::to_string(data.size()));
  }
  return Matrix(rows, cols, std::move(data));
}

Json to_json(const TokenMap& t) {
  return Json{{"h", t.h()}, {"w", t.w()}, {"d", t.d()}, {"data", reals(t.data())}};
}

TokenMap token_map_from_json(const Json& j, const std::string& path) {
  const std::size_t h = as_count(field(j, "h", path), path + ".h");
  const std::size_t w = as_count(field(j, "w", path), path + ".w");
  const std::size_t d = as_count(field(j, "d", path), path + ".d");
  auto data = as_reals(field(j, "data", path), path + ".data");
  if (data.size() != h * w * d) {
    throw ConfigError(path + ".data", "expected " + std::to_string(h * w * d) + " values, got " +
                                          std::to_string(data.size()));
  }
  return TokenMap(h, w, d, std::move(data));
}

Json to_json(const AttnParams& p) {
  Json j{{"w_q", to_json(p.w_q)}, {"w_k", to_json(p.w_k)}, {"w_v", to_json(p.w_v)}};
  if (p.w_o) j["w_o"] = to_json(*p.w_o);
  return j;
}

AttnParams attn_from_json(const Json& j, const std::string& path) {
  AttnParams p;
  p.w_q = matrix_from_json(field(j, "w_q", path), path + ".w_q");
  p.w_k = matrix_from_json(field(j, "w_k", path), path + ".w_k");
  p.w_v = matrix_from_json(field(j, "w_v", path), path + ".w_v");
  if (const Json* o = optional_field(j, "w_o", path)) p.w_o = matrix_from_json(*o, path + ".w_o");
  validated(path, [&] { p.validate(); });
  return p;
}

Json to_json(const FfnParams& p) {
  return Json{{"w1", to_json(p.w1)}, {"b1", reals(p.b1)}, {"w2", to_json(p.w2)}, {"b2", reals(p.b2)}};
}

FfnParams ffn_from_json(const Json& j, const std::string& path) {
  FfnParams p;
  p.w1 = matrix_from_json(field(j, "w1", path), path + ".w1");
  p.b1 = as_reals(field(j, "b1", path), path + ".b1");
  p.w2 = matrix_from_json(field(j, "w2", path), path + ".w2");
  p.b2 = as_reals(field(j, "b2", path), path + ".b2");
  validated(path, [&] { p.validate(); });
  return p;
}

Json to_json(const TokenwiseMap& g) {
  switch (g.kind) {
    case TokenwiseKind::kIdentity:
      return Json{{"kind", "identity"}};
    case TokenwiseKind::kAffine:
      return Json{{"kind", "affine"}, {"w", to_json(g.w)}, {"b", reals(g.b)}};
    case TokenwiseKind::kLayerNorm:
      return Json{{"kind", "layer_norm"}, {"ln_eps", g.ln_eps}};
  }
  return Json{{"kind", "identity"}};
}

TokenwiseMap tokenwise_from_json(const Json& j, const std::string& path) {
  TokenwiseMap g;
  const std::string kind = as_string(field(j, "kind", path), path + ".kind");
  if (kind == "identity") {
    g.kind = TokenwiseKind::kIdentity;
  } else if (kind == "affine") {
    g.kind = TokenwiseKind::kAffine;
    g.w = matrix_from_json(field(j, "w", path), path + ".w");
    g.b = as_reals(field(j, "b", path), path + ".b");
    if (g.w.rows() != g.w.cols() || g.b.size() != g.w.cols()) {
      throw ConfigError(path, "affine map needs a square w and matching b");
    }
  } else if (kind == "layer_norm") {
    g.kind = TokenwiseKind::kLayerNorm;
    if (const Json* e = optional_field(j, "ln_eps", path)) g.ln_eps = as_real(*e, path + ".ln_eps");
  } else {
    throw ConfigError(path + ".kind", "unknown kind '" + kind + "'");
  }
  return g;
}

Json to_json(const FlowMatchParams& p) {
  return Json{{"mod_w", to_json(p.mod_w)}, {"mod_b", reals(p.mod_b)}, {"attn", to_json(p.attn)},
              {"out_w", to_json(p.out_w)}, {"out_b", reals(p.out_b)}, {"ln_eps", p.ln_eps}};
}

FlowMatchParams flow_match_from_json(const Json& j, const std::string& path) {
  FlowMatchParams p;
  p.mod_w = matrix_from_json(field(j, "mod_w", path), path + ".mod_w");
  p.mod_b = as_reals(field(j, "mod_b", path), path + ".mod_b");
  p.attn = attn_from_json(field(j, "attn", path), path + ".attn");
  p.out_w = matrix_from_json(field(j, "out_w", path), path + ".out_w");
  p.out_b = as_reals(field(j, "out_b", path), path + ".out_b");
  if (const Json* e = optional_field(j, "ln_eps", path)) p.ln_eps = as_real(*e, path + ".ln_eps");
  const std::size_t c = p.mod_w.rows();
  if (p.mod_w.cols() != 6 * c || p.mod_b.size() != 6 * c) {
    throw ConfigError(path + ".mod_w", "modulation MLP must map c -> 6c");
  }
  if (p.out_w.rows() != c || p.out_w.cols() != c || p.out_b.size() != c) {
    throw ConfigError(path + ".out_w", "output MLP must map c -> c");
  }
  return p;
}

Json to_json(const SeparationReport& r) {
  Json collisions = Json::array();
  for (const auto& c : r.collisions) collisions.push_back(c);
  return Json{{"kind", "separation"},
              {"gamma_min_measured", json_number(r.gamma_min_measured)},
              {"gamma_max_measured", json_number(r.gamma_max_measured)},
              {"delta_measured", json_number(r.delta_measured)},
              {"kappa", json_number(r.kappa)},
              {"class", std::string(to_string(r.cls))},
              {"tokens", r.tokens},
              {"vocabulary_size", r.vocabulary_size},
              {"collisions", collisions}};
}

Json to_json(const ContextualReport& r) {
  return Json{{"kind", "contextual"},
              {"gamma_measured", json_number(r.gamma_measured)},
              {"delta_measured", json_number(r.delta_measured)},
              {"guaranteed_gamma", json_number(r.guaranteed_gamma)},
              {"log_guaranteed_delta", json_number(r.log_guaranteed_delta)},
              {"eps", json_number(r.eps)},
              {"kappa", json_number(r.kappa)},
              {"gamma_max", json_number(r.gamma_max)},
              {"vocabulary_size", r.vocabulary_size},
              {"d", r.d},
              {"seq_len", r.seq_len},
              {"pairs_compared", r.pairs_compared},
              {"distinct_ok", r.distinct_ok},
              {"delta_bound_ok", r.delta_bound_ok}};
}

Json to_json(const BoundReport& r) {
  Json extras = Json::object();
  for (const auto& [k, v] : r.extras) extras[k] = json_number(v);
  Json notes = Json::array();
  for (const auto& n : r.notes) notes.push_back(n);
  return Json{{"kind", "bound"},
              {"name", r.name},
              {"lhs_measured", json_number(r.lhs_measured)},
              {"rhs_theoretical", json_number(r.rhs_theoretical)},
              {"slack", json_number(r.slack)},
              {"pass", r.pass},
              {"hypotheses_met", r.hypotheses_met},
              {"samples", r.samples},
              {"norm_kind", r.norm_kind},
              {"seeds", r.seeds},
              {"tolerance", r.tolerance},
              {"notes", notes},
              {"extras", extras}};
}

VarDemoConfig var_config_from_json(const Json& j) {
  VarDemoConfig cfg;
  const Json& sched = field(j, "schedule", "$");
  if (!sched.is_array() || sched.empty()) throw ConfigError("$.schedule", "expected a non-empty array");
  for (std::size_t k = 0; k < sched.size(); ++k) {
    const std::string p = "$.schedule[" + std::to_string(k) + "]";
    if (!sched[k].is_array() || sched[k].size() != 2) throw ConfigError(p, "expected [h, w]");
    cfg.schedule.levels.push_back({as_count(sched[k][0], p + "[0]"), as_count(sched[k][1], p + "[1]")});
  }
  cfg.schedule.d = as_count(field(j, "d", "$"), "$.d");
  validated("$.schedule", [&] { cfg.schedule.validate(); });

  if (const Json* s = optional_field(j, "head_size", "$")) cfg.head_size = as_count(*s, "$.head_size");
  if (const Json* c = optional_field(j, "hidden", "$")) cfg.hidden = as_count(*c, "$.hidden");
  cfg.interp = interp_from(j);
  if (const Json* o = optional_field(j, "order", "$")) {
    try {
      cfg.order = block_order_from_string(as_string(*o, "$.order"));
    } catch (const DomainError& e) {
      throw ConfigError("$.order", e.what());
    }
  }
  if (const Json* s = optional_field(j, "param_seed", "$")) cfg.param_seed = as_seed(*s, "$.param_seed");
  if (const Json* lv = optional_field(j, "levels", "$")) {
    cfg.levels = parse_list(*lv, "$.levels", [](const Json& e, const std::string& p) {
      VarLevelParams l;
      l.attn = attn_from_json(field(e, "attn", p), p + ".attn");
      l.ffn = ffn_from_json(field(e, "ffn", p), p + ".ffn");
      if (const Json* g = optional_field(e, "g", p)) l.g = tokenwise_from_json(*g, p + ".g");
      return l;
    });
    if (cfg.levels->size() != cfg.schedule.depth()) {
      throw ConfigError("$.levels", "expected one entry per schedule level");
    }
  }
  if (const Json* x = optional_field(j, "x_init", "$")) {
    cfg.x_init = token_map_from_json(*x, "$.x_init");
    if (cfg.x_init->h() != 1 || cfg.x_init->w() != 1 || cfg.x_init->d() != cfg.schedule.d) {
      throw ConfigError("$.x_init", "expected a 1 x 1 x d map");
    }
  }
  return cfg;
}

FlowArDemoConfig flowar_config_from_json(const Json& j) {
  FlowArDemoConfig cfg;
  cfg.scales = as_count(field(j, "scales", "$"), "$.scales");
  cfg.base = as_count(field(j, "base", "$"), "$.base");
  cfg.h = as_count(field(j, "h", "$"), "$.h");
  cfg.w = as_count(field(j, "w", "$"), "$.w");
  cfg.c = as_count(field(j, "c", "$"), "$.c");
  if (const Json* v = optional_field(j, "hidden", "$")) cfg.hidden = as_count(*v, "$.hidden");
  if (const Json* v = optional_field(j, "steps", "$")) cfg.steps = as_count(*v, "$.steps");
  cfg.interp = interp_from(j);
  if (const Json* s = optional_field(j, "param_seed", "$")) cfg.param_seed = as_seed(*s, "$.param_seed");
  if (const Json* tf = optional_field(j, "tf", "$")) {
    cfg.tf = parse_list(*tf, "$.tf", [](const Json& e, const std::string& p) {
      return ArScaleParams{attn_from_json(field(e, "attn", p), p + ".attn"),
                           ffn_from_json(field(e, "ffn", p), p + ".ffn")};
    });
  }
  if (const Json* nn = optional_field(j, "nn", "$")) {
    cfg.nn = parse_list(*nn, "$.nn", [](const Json& e, const std::string& p) {
      return flow_match_from_json(e, p);
    });
  }
  if (cfg.tf.has_value() != cfg.nn.has_value()) {
    throw ConfigError(cfg.tf ? "$.nn" : "$.tf", "tf and nn must be given together");
  }
  if (const Json* z = optional_field(j, "z_init", "$")) cfg.z_init = token_map_from_json(*z, "$.z_init");
  return cfg;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("$", "cannot open config file '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("$", std::string("invalid JSON in '") + path + "': " + e.what());
  }
}

}  // namespace varapprox

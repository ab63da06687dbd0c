#include <cmath>
#include <fstream>
#include <limits>

#include <gtest/gtest.h>

#include "varapprox/error.hpp"
#include "varapprox/json_io.hpp"
#include "varapprox/rng.hpp"

using namespace varapprox;

namespace {

std::string config_error_path(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<no error>";
}

}  // namespace

TEST(Json, NumbersKeepNonFinite) {
  EXPECT_EQ(json_number(1.5), Json(1.5));
  EXPECT_EQ(json_number(std::numeric_limits<double>::infinity()), Json("inf"));
  EXPECT_EQ(json_number(-std::numeric_limits<double>::infinity()), Json("-inf"));
  EXPECT_EQ(json_number(std::nan("")), Json("nan"));
}

TEST(Json, MatrixRoundTrip) {
  Rng rng(1, "json");
  const Matrix m = rng.gaussian_matrix(3, 2);
  EXPECT_EQ(matrix_from_json(Json::parse(to_json(m).dump())), m);
  const TokenMap t = rng.gaussian_map(2, 3, 2);
  EXPECT_EQ(token_map_from_json(Json::parse(to_json(t).dump())), t);
}

TEST(Json, MatrixErrorsNamePath) {
  Json j = {{"rows", 2}, {"cols", 2}, {"data", {1, 2, 3}}};
  EXPECT_EQ(config_error_path([&] { matrix_from_json(j, "$.m"); }), "$.m.data");
  j = {{"rows", 1}, {"cols", 2}, {"data", {1, "x"}}};
  EXPECT_EQ(config_error_path([&] { matrix_from_json(j, "$.m"); }), "$.m.data[1]");
  EXPECT_EQ(config_error_path([&] { matrix_from_json(Json::object(), "$.m"); }), "$.m.rows");
}

TEST(Json, ParamsRoundTrip) {
  Rng rng(2, "params");
  AttnParams a;
  a.w_q = rng.gaussian_matrix(2, 1);
  a.w_k = rng.gaussian_matrix(2, 1);
  a.w_v = rng.gaussian_matrix(2, 1);
  a.w_o = rng.gaussian_matrix(1, 2);
  const AttnParams a2 = attn_from_json(to_json(a));
  EXPECT_EQ(a2.w_q, a.w_q);
  EXPECT_EQ(a2.w_o, a.w_o);

  FfnParams f;
  f.w1 = rng.gaussian_matrix(4, 2);
  f.b1 = rng.gaussian_vector(4);
  f.w2 = rng.gaussian_matrix(2, 4);
  f.b2 = rng.gaussian_vector(2);
  const FfnParams f2 = ffn_from_json(to_json(f));
  EXPECT_EQ(f2.w1, f.w1);
  EXPECT_EQ(f2.b2, f.b2);

  TokenwiseMap g;
  g.kind = TokenwiseKind::kLayerNorm;
  g.ln_eps = 1e-3;
  const TokenwiseMap g2 = tokenwise_from_json(to_json(g));
  EXPECT_EQ(g2.kind, TokenwiseKind::kLayerNorm);
  EXPECT_EQ(g2.ln_eps, 1e-3);
}

TEST(Json, VarConfigDefaultsAndErrors) {
  const Json j = Json::parse(R"({"schedule": [[1,1],[2,2],[4,4]], "d": 2})");
  const VarDemoConfig c = var_config_from_json(j);
  EXPECT_EQ(c.schedule.levels.size(), 3u);
  EXPECT_EQ(c.schedule.d, 2u);
  EXPECT_EQ(c.interp.kernel, KernelKind::kCubicBSpline);
  EXPECT_FALSE(c.levels.has_value());

  const Json bad_kernel = Json::parse(R"({"schedule": [[1,1]], "d": 1, "kernel": "lanczos"})");
  EXPECT_EQ(config_error_path([&] { var_config_from_json(bad_kernel); }), "$.kernel");
  const Json bad_level = Json::parse(R"({"schedule": [[1,1],[2]], "d": 1})");
  EXPECT_EQ(config_error_path([&] { var_config_from_json(bad_level); }), "$.schedule[1]");
  EXPECT_EQ(config_error_path([&] { var_config_from_json(Json::parse(R"({"d": 1})")); }), "$.schedule");
}

TEST(Json, FlowArConfigRequiresBothParamLists) {
  const Json ok = Json::parse(R"({"scales": 2, "base": 2, "h": 2, "w": 2, "c": 1, "steps": 4})");
  const FlowArDemoConfig c = flowar_config_from_json(ok);
  EXPECT_EQ(c.scales, 2u);
  EXPECT_EQ(c.steps, 4u);
  Json half = ok;
  half["tf"] = Json::array();
  EXPECT_THROW(flowar_config_from_json(half), ConfigError);
}

TEST(Json, ReadFileErrors) {
  EXPECT_THROW(read_json_file("/nonexistent/varapprox.json"), ConfigError);
  const std::string path = ::testing::TempDir() + "/broken.json";
  std::ofstream(path) << "{ not json";
  EXPECT_THROW(read_json_file(path), ConfigError);
}

TEST(Json, BoundReportFields) {
  BoundReport r;
  r.name = "demo";
  r.lhs_measured = 1.0;
  r.rhs_theoretical = 2.0;
  r.add("k", 3.0);
  r.finalize();
  const Json j = to_json(r);
  EXPECT_EQ(j.at("name"), "demo");
  EXPECT_EQ(j.at("pass"), true);
  EXPECT_EQ(j.at("slack"), 1.0);
  EXPECT_EQ(j.at("extras").at("k"), 3.0);
}

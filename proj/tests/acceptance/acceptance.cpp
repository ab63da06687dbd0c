// Acceptance criteria AC1-AC11, one PASS/FAIL line each.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "../oracles.hpp"
#include "varapprox/analysis.hpp"
#include "varapprox/error.hpp"
#include "varapprox/flowar.hpp"
#include "varapprox/interp.hpp"
#include "varapprox/nn.hpp"
#include "varapprox/rng.hpp"
#include "varapprox/var_model.hpp"
#include "varapprox/verify.hpp"

using namespace varapprox;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    } else if (!ok) {
      detail += "; " + what;
    }
  }
};

std::string num(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Shared seed-7 run of every suite, reused by the criteria that fold Monte Carlo families.
struct SuiteRun {
  std::vector<CheckResult> checks;
  std::map<std::string, const CheckResult*> by_name;
  double seconds = 0.0;
  std::string body;
};

SuiteRun run_all() {
  SuiteRun r;
  VerifyOptions opts;
  opts.seed = 7;
  const auto t0 = Clock::now();
  r.checks = run_suite("all", opts);
  r.seconds = seconds_since(t0);
  r.body = report_body(r.checks).dump();
  for (const auto& c : r.checks) r.by_name[c.name] = &c;
  return r;
}

void require_check(Outcome& o, const SuiteRun& run, const std::string& name) {
  const auto it = run.by_name.find(name);
  if (it == run.by_name.end()) {
    o.require(false, name + " missing");
    return;
  }
  o.require(it->second->pass, name + ": " + it->second->failure);
}

Outcome ac1() {
  Outcome o;
  Rng rng(7, "acceptance/ac1");
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const std::size_t h = rng.uniform_int(1, 6), w = rng.uniform_int(1, 6);
    const std::size_t dh = rng.uniform_int(h, 12), dw = rng.uniform_int(w, 12);
    const KernelKind kind = k % 2 == 0 ? KernelKind::kCubicBSpline : KernelKind::kKeysCatmullRom;
    const TokenMap x = rng.gaussian_map(h, w, rng.uniform_int(1, 3));
    const UpInterpOp op = materialize_up({h, w}, {dh, dw}, {kind, StencilMode::kFractional});
    const TokenMap via_matrix = op.apply(x);
    worst = std::max(worst, oracle::max_abs_diff(via_matrix, oracle::up_interpolate(x, dh, dw, kind)));
    worst = std::max(worst, oracle::max_abs_diff(via_matrix, up_interpolate(x, dh, dw, {kind, StencilMode::kFractional})));
  }
  const double secs = seconds_since(t0);
  o.require(worst <= 1e-10, "max error " + num(worst));
  o.require(secs < 5.0, "runtime " + num(secs) + " s");
  o.detail = o.pass ? "100 cases, max |matrix - stencil| = " + num(worst) + ", " + num(secs) + " s" : o.detail;
  return o;
}

Outcome ac2() {
  Outcome o;
  double lo_b = 1.0, hi_b = 0.0, lo_k = 1.0;
  for (int k = -3000; k <= 3000; ++k) {
    const double x = k * 1e-3;
    lo_b = std::min(lo_b, kernel_eval(KernelKind::kCubicBSpline, x));
    hi_b = std::max(hi_b, kernel_eval(KernelKind::kCubicBSpline, x));
    lo_k = std::min(lo_k, kernel_eval(KernelKind::kKeysCatmullRom, x));
  }
  // Formula oracle: the Keys outer piece is minimized at |x| = 4/3.
  const double oracle_min = oracle::keys(4.0 / 3.0);
  o.require(lo_b >= 0.0 && hi_b <= 1.0, "B-spline range [" + num(lo_b) + ", " + num(hi_b) + "]");
  o.require(lo_k < 0.0, "Keys kernel never negative");
  o.require(std::abs(lo_k - oracle_min) <= 1e-6, "Keys min " + num(lo_k) + " vs oracle " + num(oracle_min));
  if (o.pass) {
    o.detail = "B-spline in [" + num(lo_b) + ", " + num(hi_b) + "]; Keys min " + num(lo_k) +
               " = formula oracle -2/27 (" + num(oracle_min) + ")";
  }
  return o;
}

Outcome ac3() {
  Outcome o;
  Rng rng(7, "acceptance/ac3");
  for (int k = 0; k < 20; ++k) {
    TokenMap x_init = rng.gaussian_map(1, 1, rng.uniform_int(1, 4), std::pow(10.0, rng.uniform(-200, 200)));
    const std::vector<Shape2> schedule{{1, 1}};
    const auto out = pyramid_up({}, x_init, schedule);
    o.require(out.size() == 1 && out[0] == x_init, "pyramid base case changed X_init");
    const Matrix init = matricize(x_init);
    const UpPlan plan{{}, {{1, 1}}};
    o.require(apply_up(Matrix(0, x_init.d()), plan, {}, &init) == init, "level-1 up stage changed X_init");
  }
  if (o.pass) o.detail = "20 maps, bit-exact";
  return o;
}

Outcome ac4() {
  Outcome o;
  Rng rng(7, "acceptance/ac4");
  double worst_rows = 0.0, worst_perm = 0.0;
  for (int k = 0; k < 100; ++k) {
    const std::size_t n = rng.uniform_int(1, 8), d = rng.uniform_int(1, 4);
    AttnParams p;
    p.w_q = rng.gaussian_matrix(d, d);
    p.w_k = rng.gaussian_matrix(d, d);
    p.w_v = rng.gaussian_matrix(d, d);
    const Matrix x = rng.gaussian_matrix(n, d);
    const Matrix a = attention_weights(x, p);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (double v : a.row(i)) s += v;
      worst_rows = std::max(worst_rows, std::abs(s - 1.0));
    }
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.uniform_int(0, i - 1)]);
    Matrix px(n, d);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t l = 0; l < d; ++l) px(i, l) = x(perm[i], l);
    const Matrix ax = attention(x, p), apx = attention(px, p);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t l = 0; l < d; ++l) worst_perm = std::max(worst_perm, std::abs(apx(i, l) - ax(perm[i], l)));
  }
  o.require(worst_rows <= 1e-12, "row sum error " + num(worst_rows));
  o.require(worst_perm <= 1e-10, "permutation error " + num(worst_perm));
  if (o.pass) o.detail = "100 cases, row error " + num(worst_rows) + ", permutation error " + num(worst_perm);
  return o;
}

Outcome ac5() {
  Outcome o;
  Rng rng(7, "acceptance/ac5");
  const ScaleSchedule s{{{1, 1}, {2, 2}, {4, 4}}, 2};
  for (BlockOrder order : {BlockOrder::kFfnAttnUp, BlockOrder::kGAttnUp}) {
    const VarStackParams p = random_var_stack(s, 2, 4, rng, {}, order);
    const VarForwardResult r = var_forward(rng.gaussian_map(1, 1, 2), p);
    o.require(r.output.rows() == 21 && r.output.cols() == 2,
              std::string(to_string(order)) + ": output " + std::to_string(r.output.rows()) + " rows");
  }
  if (o.pass) o.detail = "21 x 2 output for both block orders";
  return o;
}

Outcome ac6(const SuiteRun& run) {
  Outcome o;
  require_check(o, run, "contextual/attention_distinct");
  require_check(o, run, "contextual/identity_counterexample");
  // Direct counterexample, independent of the suite.
  const std::vector<Matrix> seqs{Matrix{{1, 0, 0}, {0, 1, 0}}, Matrix{{1, 0, 0}, {0, 0, 1}}};
  const ContextualReport id = contextual_mapping_check([](const Matrix& x) { return x; }, seqs);
  o.require(!id.distinct_ok, "identity accepted as contextual mapping");
  const double expected = -5.0 * 16 * 2 * 2 * 1 * std::log(2.0);
  o.require(std::abs(log_contextual_delta(1.0, 2, 2, 2.0, 1.0, 2) - expected) <= 1e-9 * std::abs(expected),
            "log delta formula");
  if (o.pass) {
    const Json& m = run.by_name.at("contextual/attention_distinct")->body.at("metrics");
    o.detail = "100/100 trials distinct, min log margin " + m.at("min_log_margin").dump() +
               "; identity rejected";
  }
  return o;
}

Outcome ac7(const SuiteRun& run) {
  Outcome o;
  require_check(o, run, "perturbation/two_layer_random_affine");
  require_check(o, run, "perturbation/two_layer_tightness");
  const double k1 = 1.7, eps1 = 0.3;
  Sampling s;
  s.domain = {2, 2, -1, 1};
  s.seed = 7;
  const MatFn f = [k1](const Matrix& x) { return k1 * x; };
  const MatFn g = [eps1](const Matrix& x) { return x + Matrix(2, 2, eps1 / 2.0); };
  const MatFn phi = [](const Matrix& x) { return x; };
  const BoundReport r = two_layer_bound_check(f, g, f, phi, k1, eps1, 0.0, s);
  o.require(r.pass && std::abs(r.lhs_measured - r.rhs_theoretical) <= 1e-9,
            "witness lhs " + num(r.lhs_measured) + " rhs " + num(r.rhs_theoretical));
  if (o.pass) {
    const Json& b = run.by_name.at("perturbation/two_layer_random_affine")->body;
    o.detail = b.at("trials_passed").dump() + "/" + b.at("trials").dump() + " affine trials; witness lhs = rhs = " +
               num(r.lhs_measured);
  }
  return o;
}

Outcome ac8(const SuiteRun& run) {
  Outcome o;
  require_check(o, run, "perturbation/substitution_linear");
  require_check(o, run, "perturbation/substitution_witness");
  require_check(o, run, "perturbation/telescoping");
  const double eps = 0.25;
  const MatFn two = [](const Matrix& x) { return 2.0 * x; };
  const std::vector<MatFn> vs{two, two, two, two};
  std::vector<MatFn> us = vs;
  us[0] = [eps](const Matrix& x) { return 2.0 * x + Matrix(1, 1, eps); };
  Sampling s;
  s.domain = {1, 1, -1, 1};
  s.seed = 7;
  const BoundReport r = one_layer_substitution_check(us, vs, 1, eps, 2.0, s);
  o.require(r.pass && std::abs(r.lhs_measured - 8 * eps) <= 1e-9, "witness lhs " + num(r.lhs_measured));
  if (o.pass) o.detail = "linear depth <= 5 and telescoping families pass; witness lhs = 8 eps = " + num(r.lhs_measured);
  return o;
}

Outcome ac9(const SuiteRun& run) {
  Outcome o;
  require_check(o, run, "universality/linear_up");
  require_check(o, run, "universality/linear_down");
  require_check(o, run, "universality/rejects_k2_le_2");
  const MatFn id = [](const Matrix& x) { return x; };
  const std::vector<LayerPair> layers{{id, id}};
  const std::vector<double> one{1.0}, zero{0.0};
  Sampling s;
  std::string hypothesis;
  try {
    universality_bound_check(layers, layers, 2.0, one, zero, zero, ResampleMode::kDown, s);
  } catch (const HypothesisError& e) {
    hypothesis = e.hypothesis();
  }
  o.require(hypothesis == "Assume K2 > 2", "K2 = 2 not rejected by name");
  if (o.pass) {
    const Json& up = run.by_name.at("universality/linear_up")->body;
    const Json& down = run.by_name.at("universality/linear_down")->body;
    o.detail = "up " + up.at("trials_passed").dump() + "/" + up.at("trials").dump() + ", down " +
               down.at("trials_passed").dump() + "/" + down.at("trials").dump() +
               " (both inequalities); K2 = 2 rejected";
  }
  return o;
}

Outcome ac10(const SuiteRun& run) {
  Outcome o;
  for (const char* n : {"flowar/endpoints", "flowar/oracle_loss_zero", "flowar/constant_field_euler",
                        "flowar/loss_directional_derivative"}) {
    require_check(o, run, n);
  }
  Rng rng(7, "acceptance/ac10");
  const TokenMap y = rng.gaussian_map(3, 2, 2), f0 = rng.gaussian_map(3, 2, 2);
  o.require(flow_interpolate(y, f0, 0.0) == f0 && flow_interpolate(y, f0, 1.0) == y, "endpoints not bit-exact");
  if (o.pass) o.detail = "endpoints, oracle loss, constant-field Euler and directional derivative";
  return o;
}

Outcome ac11(const SuiteRun& first) {
  Outcome o;
  const SuiteRun second = run_all();
  o.require(first.body == second.body, "report bodies differ");
  const double total = first.seconds + second.seconds;
  o.require(first.seconds < 120.0, "runtime " + num(first.seconds) + " s");
  if (o.pass) {
    o.detail = "byte-identical bodies (" + std::to_string(first.body.size()) + " bytes), " + num(first.seconds) +
               " s per run, " + num(total) + " s for two";
  }
  return o;
}

}  // namespace

int main() {
  int failed = 0;
  const auto report = [&](const char* id, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", id, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  };

  report("AC1", ac1);
  report("AC2", ac2);
  report("AC3", ac3);
  report("AC4", ac4);
  report("AC5", ac5);
  const SuiteRun run = run_all();
  report("AC6", [&] { return ac6(run); });
  report("AC7", [&] { return ac7(run); });
  report("AC8", [&] { return ac8(run); });
  report("AC9", [&] { return ac9(run); });
  report("AC10", [&] { return ac10(run); });
  report("AC11", [&] { return ac11(run); });
  std::printf("%d/11 criteria passed\n", 11 - failed);
  return failed == 0 ? 0 : 1;
}

#include <cmath>

#include "common.hpp"
#include "varapprox/flowar.hpp"
#include "varapprox/interp.hpp"

namespace varapprox::suites {

namespace {

double max_abs_diff(const TokenMap& a, const TokenMap& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.data().size(); ++k) m = std::max(m, std::abs(a.data()[k] - b.data()[k]));
  return m;
}

struct Setup {
  FlowArConfig cfg;
  TokenMap x;
  TokenMap z_init;
};

Setup make_setup(Rng& rng, std::size_t scales, std::size_t hw, std::size_t c) {
  Setup s;
  s.cfg = random_flowar_config(scales, 2, hw, hw, c, 4, rng);
  s.x = rng.gaussian_map(hw, hw, c);
  const Shape2 first = s.cfg.scale_shape(1);
  s.z_init = rng.gaussian_map(first.h, first.w, c);
  return s;
}

CheckResult endpoints(const VerifyOptions& opts) {
  PropertyCheck c("flowar/endpoints", 0.0);
  Rng root = check_rng(opts, "flowar/endpoints");
  for (std::size_t k = 0; k < 100; ++k) {
    Rng rng = root.substream("trial/" + std::to_string(k));
    const std::size_t h = rng.uniform_int(1, 4), w = rng.uniform_int(1, 4), d = rng.uniform_int(1, 3);
    const TokenMap y = rng.gaussian_map(h, w, d);
    const TokenMap f0 = rng.gaussian_map(h, w, d);
    c.expect(flow_interpolate(y, f0, 0.0) == f0, "F_0 != F0 in trial " + std::to_string(k));
    c.expect(flow_interpolate(y, f0, 1.0) == y, "F_1 != Y in trial " + std::to_string(k));
  }
  return c.finish();
}

CheckResult affinity(const VerifyOptions& opts) {
  PropertyCheck c("flowar/affinity", 1e-12);
  Rng root = check_rng(opts, "flowar/affinity");
  for (std::size_t k = 0; k < 100; ++k) {
    Rng rng = root.substream("trial/" + std::to_string(k));
    const std::size_t h = rng.uniform_int(1, 4), w = rng.uniform_int(1, 4), d = rng.uniform_int(1, 3);
    const TokenMap y = rng.gaussian_map(h, w, d);
    const TokenMap f0 = rng.gaussian_map(h, w, d);
    const double t = rng.uniform(), s = rng.uniform();
    const TokenMap lhs = flow_interpolate(y, f0, t) - flow_interpolate(y, f0, s);
    const TokenMap rhs = (t - s) * flow_velocity(y, f0);
    c.trial(max_abs_diff(lhs, rhs), "trial " + std::to_string(k));
    const TokenMap mid = flow_interpolate(y, f0, 0.5);
    c.trial(max_abs_diff(mid, 0.5 * (y + f0)), "midpoint " + std::to_string(k));
  }
  return c.finish();
}

CheckResult oracle_loss(const VerifyOptions& opts) {
  PropertyCheck c("flowar/oracle_loss_zero", 0.0);
  Rng rng = check_rng(opts, "flowar/oracle_loss_zero");
  const Setup s = make_setup(rng, 3, 4, 2);
  const LossNet oracle = [](const FlowState& st, const TokenMap&) { return flow_velocity(st.y, st.f0); };
  for (std::size_t k = 0; k < 3; ++k) {
    const LossDraws draws = sample_loss_draws(s.cfg, 16, rng.substream("draws/" + std::to_string(k)));
    const double loss = flowar_loss(s.cfg, s.x, s.z_init, draws, oracle);
    c.trial(loss, "draw seed " + std::to_string(k));
  }
  return c.finish();
}

CheckResult offset_loss(const VerifyOptions& opts) {
  PropertyCheck c("flowar/offset_loss", 1e-12);
  Rng rng = check_rng(opts, "flowar/offset_loss");
  const Setup s = make_setup(rng, 3, 4, 2);
  const LossDraws draws = sample_loss_draws(s.cfg, 8, rng.substream("draws"));
  std::size_t elements = 0;
  for (std::size_t i = 1; i <= s.cfg.scales; ++i) elements += s.cfg.scale_shape(i).area() * s.cfg.c;
  for (double off : {0.5, -1.25, 3.0}) {
    const LossNet net = [off](const FlowState& st, const TokenMap&) {
      TokenMap v = flow_velocity(st.y, st.f0);
      for (double& e : v.data()) e += off;
      return v;
    };
    const double loss = flowar_loss(s.cfg, s.x, s.z_init, draws, net);
    const double expected = off * off * static_cast<double>(elements);
    c.trial(std::abs(loss - expected) / expected, "offset " + num_str(off));
  }
  c.metric("normalization", "sum over scales of the sample mean of the squared Frobenius residual");
  c.metric("elements", elements);
  return c.finish();
}

CheckResult constant_field(const VerifyOptions& opts) {
  PropertyCheck c("flowar/constant_field_euler", 1e-12);
  Rng rng = check_rng(opts, "flowar/constant_field_euler");
  const Setup s = make_setup(rng, 1, 3, 2);
  const TokenMap v_star = rng.gaussian_map(3, 3, 2);
  const VelocityNet net = [v_star](std::size_t, const TokenMap&, const TokenMap&, double) { return v_star; };
  for (std::size_t steps : {1, 2, 3, 5, 7, 8, 16, 100}) {
    const FlowArInference inf = flowar_infer(s.cfg, s.z_init, opts.seed, steps, net);
    const TokenMap expected = inf.scales.front().f0 + v_star;
    double scale = 1.0;
    for (double v : expected.data()) scale = std::max(scale, std::abs(v));
    c.trial(max_abs_diff(inf.output, expected) / scale, "T = " + std::to_string(steps));
  }
  c.metric("tolerance_basis", "relative to max(1, |F0 + V*|)");
  return c.finish();
}

CheckResult single_step(const VerifyOptions& opts) {
  PropertyCheck c("flowar/single_step", 0.0);
  Rng rng = check_rng(opts, "flowar/single_step");
  const Setup s = make_setup(rng, 2, 2, 2);
  const FlowArInference inf = flowar_infer(s.cfg, s.z_init, opts.seed, 1);
  const VelocityNet net = default_velocity_net(s.cfg);
  for (std::size_t i = 0; i < inf.scales.size(); ++i) {
    const InferScale& sc = inf.scales[i];
    const TokenMap expected = sc.f0 + net(i + 1, sc.f0, sc.cond, 0.0);
    c.trial(max_abs_diff(sc.s_hat, expected), "scale " + std::to_string(i + 1));
  }
  c.expect(inf.scales.size() == 2 && inf.scales[0].shape == Shape2{1, 1} && inf.scales[1].shape == Shape2{2, 2},
           "scale shapes are not (1,1), (2,2)");
  c.expect(inf.scales.size() == 2 && inf.scales[1].sequence_length == 5, "scale 2 sequence length is not 5");
  return c.finish();
}

// d/dh of the loss along out_b += h u, analytic because the output is linear in out_b.
double analytic_directional(const Setup& s, const LossDraws& draws, const std::vector<std::vector<double>>& dirs) {
  const LossBreakdown base = flowar_loss_detailed(s.cfg, s.x, s.z_init, draws, default_loss_net(s.cfg));
  double total = 0.0;
  for (std::size_t i = 0; i < s.cfg.scales; ++i) {
    double acc = 0.0;
    for (const auto& d : draws[i]) {
      const FlowState st = make_flow_state(i + 1, base.targets[i], d.f0, d.t);
      const FlowMatchTrace tr = flow_matching_trace(st.f, base.conditions[i], st.t, s.cfg.nn[i]);
      const Matrix v = matricize(flow_velocity(st.y, st.f0));
      for (std::size_t r = 0; r < v.rows(); ++r)
        for (std::size_t l = 0; l < v.cols(); ++l)
          acc += 2.0 * (tr.output(r, l) - v(r, l)) * dirs[i][l] * tr.alpha2(r, l);
    }
    total += acc / static_cast<double>(draws[i].size());
  }
  return total;
}

CheckResult loss_derivative(const VerifyOptions& opts) {
  PropertyCheck c("flowar/loss_directional_derivative", 1e-4);
  Rng root = check_rng(opts, "flowar/loss_directional_derivative");
  for (std::size_t k = 0; k < 5; ++k) {
    Rng rng = root.substream("trial/" + std::to_string(k));
    const Setup s = make_setup(rng, 2, 4, 2);
    const LossDraws draws = sample_loss_draws(s.cfg, 6, rng.substream("draws"));
    std::vector<std::vector<double>> dirs;
    for (std::size_t i = 0; i < s.cfg.scales; ++i) dirs.push_back(rng.gaussian_vector(s.cfg.c));
    auto loss_at = [&](double h) {
      Setup p = s;
      for (std::size_t i = 0; i < p.cfg.scales; ++i)
        for (std::size_t l = 0; l < p.cfg.c; ++l) p.cfg.nn[i].out_b[l] += h * dirs[i][l];
      return flowar_loss(p.cfg, p.x, p.z_init, draws);
    };
    const double h = 1e-4;
    const double fd = (loss_at(h) - loss_at(-h)) / (2.0 * h);
    const double an = analytic_directional(s, draws, dirs);
    c.trial(std::abs(fd - an) / std::max(1e-12, std::abs(an)), "trial " + std::to_string(k));
  }
  return c.finish();
}

CheckResult tokenizer_linear(const VerifyOptions& opts) {
  PropertyCheck c("flowar/tokenizer_linear", 1e-12);
  Rng rng = check_rng(opts, "flowar/tokenizer_linear");
  const Setup s = make_setup(rng, 3, 8, 2);
  const auto ys = vae_tokenize(s.x, s.cfg);
  for (std::size_t i = 1; i <= s.cfg.scales; ++i) {
    const DownSampleOp op = materialize_down(s.x.shape(), s.cfg.factor(i));
    c.trial(max_abs_diff(op.apply(s.x), ys[i - 1]), "scale " + std::to_string(i));
    c.expect(ys[i - 1].shape() == s.cfg.scale_shape(i), "scale " + std::to_string(i) + " shape");
  }
  return c.finish();
}

CheckResult infer_determinism(const VerifyOptions& opts) {
  PropertyCheck c("flowar/infer_determinism", 0.0);
  Rng r1 = check_rng(opts, "flowar/infer_determinism");
  Rng r2 = check_rng(opts, "flowar/infer_determinism");
  const Setup a = make_setup(r1, 3, 4, 2);
  const Setup b = make_setup(r2, 3, 4, 2);
  c.expect(flowar_infer(a.cfg, a.z_init, opts.seed, 8).output == flowar_infer(b.cfg, b.z_init, opts.seed, 8).output,
           "two runs with one seed differ");
  return c.finish();
}

}  // namespace

std::vector<CheckResult> flowar(const VerifyOptions& opts) {
  return {endpoints(opts),    affinity(opts),        oracle_loss(opts),      offset_loss(opts),
          constant_field(opts), single_step(opts),   loss_derivative(opts),  tokenizer_linear(opts),
          infer_determinism(opts)};
}

}  // namespace varapprox::suites

#include <cmath>

#include "common.hpp"
#include "varapprox/error.hpp"

namespace varapprox::suites {

namespace {

const Domain kDomain{2, 3, -1.0, 1.0};

// X -> X m + b on 2 x 3 inputs.
MatFn affine(const Matrix& m, const Matrix& b) {
  return [m, b](const Matrix& x) { return matmul(x, m) + b; };
}

MatFn linear(const Matrix& m) {
  return [m](const Matrix& x) { return matmul(x, m); };
}

MatFn tanh_layer(const Matrix& m) {
  return [m](const Matrix& x) {
    Matrix y = matmul(x, m);
    for (double& v : y.data()) v = std::tanh(v);
    return y;
  };
}

Matrix square(Rng& rng, double scale = 1.0) {
  return rng.gaussian_matrix(kDomain.cols, kDomain.cols, scale / std::sqrt(3.0));
}

Matrix offset(Rng& rng, double scale) { return rng.gaussian_matrix(kDomain.rows, kDomain.cols, scale); }

MatFn compose(MatFn outer, MatFn inner) {
  return [outer = std::move(outer), inner = std::move(inner)](const Matrix& x) { return outer(inner(x)); };
}

CheckResult two_layer_random(const VerifyOptions& opts) {
  BoundFamily fam("perturbation/two_layer_random_affine");
  Rng root = check_rng(opts, "perturbation/two_layer_random_affine");
  for (std::size_t k = 0; k < 100; ++k) {
    Rng rng = root.substream("trial/" + std::to_string(k));
    const Matrix mf = square(rng);
    const Matrix bf = offset(rng, 1.0);
    const Matrix mg = square(rng);
    const Matrix bg = offset(rng, 1.0);
    const double size = rng.uniform(0.01, 0.3);
    const MatFn f = affine(mf, bf);
    const MatFn tau = affine(mf + size * square(rng), bf + size * offset(rng, 1.0));
    const MatFn g = affine(mg, bg);
    const MatFn phi = affine(mg + size * square(rng), bg + size * offset(rng, 1.0));
    const Sampling s = sampling_for(opts, kDomain, rng);
    const auto pts = sample_domain(s.domain, s.samples, s.seed);
    const double eps1 = fn_distance_on(g, phi, pts, s.norm);
    const double eps2 = fn_distance_on(compose(f, phi), compose(tau, phi), pts, s.norm);
    const double k1 = spectral_norm(mf);
    fam.add(two_layer_bound_check(f, g, tau, phi, k1, eps1, eps2, s));
  }
  fam.metric("hypotheses", "eps1, eps2 measured on the check's own samples; K1 = ||M_f||");
  return fam.finish();
}

CheckResult two_layer_witness(const VerifyOptions& opts) {
  PropertyCheck c("perturbation/two_layer_tightness", 1e-9);
  Rng rng = check_rng(opts, "perturbation/two_layer_tightness");
  const double k1 = 1.7;
  const double eps1 = 0.3;
  Matrix shift = offset(rng, 1.0);
  shift *= eps1 / frobenius_norm(shift);
  const MatFn f = [k1](const Matrix& x) { return k1 * x; };
  const MatFn g = [](const Matrix& x) { return x; };
  const MatFn phi = [shift](const Matrix& x) { return x - shift; };
  const BoundReport r = two_layer_bound_check(f, g, f, phi, k1, eps1, 0.0, sampling_for(opts, kDomain, rng));
  c.expect(r.pass, "tightness witness failed its own bound");
  c.trial(std::abs(r.lhs_measured - r.rhs_theoretical), "lhs vs K1 eps1");
  const BoundReport exact = two_layer_bound_check(f, g, f, g, k1, 0.0, 0.0, sampling_for(opts, kDomain, rng));
  c.expect(exact.pass && exact.lhs_measured == 0.0, "f = tau, g = phi did not give lhs 0");
  c.metric("witness", to_json(r));
  return c.finish();
}

// Applies the first `count` maps.
std::vector<Matrix> push(const std::vector<MatFn>& fs, std::size_t count, std::vector<Matrix> pts) {
  for (auto& x : pts)
    for (std::size_t i = 0; i < count; ++i) x = fs[i](x);
  return pts;
}

CheckResult substitution(const VerifyOptions& opts, SubstitutionRegime regime) {
  const std::string name = regime == SubstitutionRegime::kLinear ? "perturbation/substitution_linear"
                                                                 : "perturbation/substitution_lipschitz";
  BoundFamily fam(name);
  Rng root = check_rng(opts, name);
  for (std::size_t k = 0; k < 60; ++k) {
    Rng rng = root.substream("trial/" + std::to_string(k));
    const std::size_t n = rng.uniform_int(1, 5);
    const std::size_t j = rng.uniform_int(1, n);
    std::vector<MatFn> us, vs;
    double k2 = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const Matrix m = square(rng, 1.5);
      const double size = rng.uniform(0.01, 0.3);
      vs.push_back(regime == SubstitutionRegime::kLinear ? linear(m) : tanh_layer(m));
      us.push_back(affine(m + size * square(rng), size * offset(rng, 1.0)));
      if (i >= j) k2 = std::max(k2, spectral_norm(m));
    }
    const Sampling s = sampling_for(opts, kDomain, rng);
    const auto w = push(us, j - 1, sample_domain(s.domain, s.samples, s.seed));
    const double eps = fn_distance_on(us[j - 1], vs[j - 1], w, s.norm);
    fam.add(one_layer_substitution_check(us, vs, j, eps, k2, s, regime));
  }
  fam.metric("regime", std::string(to_string(regime)));
  return fam.finish();
}

CheckResult substitution_witness(const VerifyOptions& opts) {
  PropertyCheck c("perturbation/substitution_witness", 1e-9);
  Rng rng = check_rng(opts, "perturbation/substitution_witness");
  const double eps = 0.25;
  Matrix shift = offset(rng, 1.0);
  shift *= eps / frobenius_norm(shift);
  const MatFn twice = [](const Matrix& x) { return 2.0 * x; };
  const MatFn shifted = [shift](const Matrix& x) { return 2.0 * x + shift; };
  const std::vector<MatFn> vs{twice, twice, twice, twice};
  const std::vector<MatFn> us{shifted, twice, twice, twice};
  const BoundReport r = one_layer_substitution_check(us, vs, 1, eps, 2.0, sampling_for(opts, kDomain, rng));
  c.expect(r.pass, "K2 = 2 depth-3 witness failed its own bound");
  c.trial(std::abs(r.lhs_measured - 8.0 * eps), "lhs vs 8 eps");
  c.trial(std::abs(r.rhs_theoretical - 8.0 * eps), "rhs vs 8 eps");

  const BoundReport last = one_layer_substitution_check(us, vs, 4, 0.0, 2.0, sampling_for(opts, kDomain, rng));
  c.expect(last.pass && last.rhs_theoretical == 0.0, "j = n with u_n = v_n should give rhs = eps = 0");
  c.metric("witness", to_json(r));
  return c.finish();
}

CheckResult telescoping(const VerifyOptions& opts) {
  BoundFamily fam("perturbation/telescoping");
  Rng root = check_rng(opts, "perturbation/telescoping");
  for (std::size_t k = 0; k < 60; ++k) {
    Rng rng = root.substream("trial/" + std::to_string(k));
    const std::size_t n = k < 20 ? 3 : rng.uniform_int(1, 5);
    std::vector<MatFn> us, vs;
    for (std::size_t i = 0; i < n; ++i) {
      const Matrix m = square(rng, 1.5);
      const Matrix b = offset(rng, 0.5);
      const double size = rng.uniform(0.01, 0.5);
      vs.push_back(affine(m, b));
      us.push_back(affine(m + size * square(rng), b + size * offset(rng, 1.0)));
    }
    fam.add(telescoping_check(us, vs, sampling_for(opts, kDomain, rng)));
  }
  return fam.finish();
}

CheckResult telescoping_degenerate(const VerifyOptions& opts) {
  PropertyCheck c("perturbation/telescoping_degenerate", 1e-12);
  Rng rng = check_rng(opts, "perturbation/telescoping_degenerate");
  const Matrix m = square(rng);
  const std::vector<MatFn> v1{affine(m, offset(rng, 1.0))};
  const std::vector<MatFn> u1{affine(m + 0.1 * square(rng), offset(rng, 1.0))};
  const BoundReport single = telescoping_check(u1, v1, sampling_for(opts, kDomain, rng));
  c.trial(std::abs(single.lhs_measured - single.rhs_theoretical), "n = 1 sides differ");
  const std::vector<MatFn> same{affine(m, offset(rng, 1.0)), linear(square(rng))};
  const BoundReport zero = telescoping_check(same, same, sampling_for(opts, kDomain, rng));
  c.trial(zero.lhs_measured + zero.rhs_theoretical, "us == vs should give 0 on both sides");
  return c.finish();
}

}  // namespace

std::vector<CheckResult> perturbation(const VerifyOptions& opts) {
  return {two_layer_random(opts),
          two_layer_witness(opts),
          substitution(opts, SubstitutionRegime::kLinear),
          substitution(opts, SubstitutionRegime::kLipschitz),
          substitution_witness(opts),
          telescoping(opts),
          telescoping_degenerate(opts)};
}

}  // namespace varapprox::suites

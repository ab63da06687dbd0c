#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "varapprox/analysis.hpp"
#include "varapprox/error.hpp"
#include "varapprox/nn.hpp"
#include "varapprox/rng.hpp"

using namespace varapprox;

namespace {

MatFn right(const Matrix& m) {
  return [m](const Matrix& x) { return oracle::product(x, m); };
}

MatFn shift(const Matrix& c) {
  return [c](const Matrix& x) { return x + c; };
}

Sampling sampling(std::size_t rows, std::size_t cols, FnNorm norm = FnNorm::kL2, std::size_t n = 500) {
  Sampling s;
  s.domain = {rows, cols, -1.0, 1.0};
  s.norm = norm;
  s.samples = n;
  s.seed = 17;
  return s;
}

// Second, independent evaluation of the guaranteed separation (natural log).
double log_delta_oracle(double eps, double v, double d, double kappa, double gmax, double len) {
  return -5.0 / eps * v * v * v * v * d * kappa * gmax * std::log(len);
}

}  // namespace

TEST(Separateness, BasisExample) {
  const std::vector<Matrix> seqs{Matrix{{2, 0}}, Matrix{{0, 3}}};
  const SeparationReport r = check_separateness(seqs);
  EXPECT_DOUBLE_EQ(r.gamma_min_measured, 2.0);
  EXPECT_DOUBLE_EQ(r.gamma_max_measured, 3.0);
  EXPECT_NEAR(r.delta_measured, std::sqrt(13.0), 1e-15);
  EXPECT_EQ(r.cls, SeparationClass::kTokenwise);
}

TEST(Separateness, ZeroTokenIsNotTokenwise) {
  const std::vector<Matrix> seqs{Matrix{{0, 0}, {1, 0}}};
  const SeparationReport r = check_separateness(seqs);
  EXPECT_NE(r.cls, SeparationClass::kTokenwise);
  EXPECT_DOUBLE_EQ(r.delta_measured, 1.0);
}

TEST(Separateness, ThresholdsAreStrict) {
  const std::vector<Matrix> seqs{Matrix{{2, 0}}, Matrix{{0, 3}}};
  const SeparationReport ok = check_separateness(seqs, SeparationThresholds{1.0, 4.0, 3.0});
  EXPECT_EQ(ok.cls, SeparationClass::kTokenwise);
  const SeparationReport tight = check_separateness(seqs, SeparationThresholds{2.0, 4.0, 3.0});
  EXPECT_NE(tight.cls, SeparationClass::kTokenwise);
  const SeparationReport none = check_separateness(seqs, SeparationThresholds{1.0, 4.0, 4.0});
  EXPECT_EQ(none.cls, SeparationClass::kNone);
}

TEST(Separateness, LabelCollisions) {
  const std::vector<Matrix> seqs{Matrix{{1, 0}}, Matrix{{1, 0}}};
  const std::vector<std::vector<int>> labels{{0}, {1}};
  const SeparationReport r = check_separateness(seqs, std::nullopt, &labels);
  EXPECT_EQ(r.collisions.size(), 1u);
  EXPECT_TRUE(std::isinf(r.delta_measured));
}

TEST(ContextualDelta, MatchesIndependentFormula) {
  EXPECT_NEAR(log_contextual_delta(1.0, 2, 2, 2.0, 1.0, 2), -320.0 * std::log(2.0), 1e-9);
  Rng rng(1, "delta-formula");
  for (int k = 0; k < 20; ++k) {
    const double eps = rng.uniform(0.1, 2.0), kappa = rng.uniform(1.0, 5.0), g = rng.uniform(0.5, 3.0);
    const std::size_t v = rng.uniform_int(2, 8), d = rng.uniform_int(1, 4), len = rng.uniform_int(2, 4);
    const double got = log_contextual_delta(eps, v, d, kappa, g, len);
    const double want = log_delta_oracle(eps, static_cast<double>(v), static_cast<double>(d), kappa, g,
                                         static_cast<double>(len));
    EXPECT_NEAR(got, want, 1e-9 * std::abs(want));
  }
}

TEST(Contextual, IdentityFailsOnSharedToken) {
  const std::vector<Matrix> seqs{Matrix{{1, 0, 0}, {0, 1, 0}}, Matrix{{1, 0, 0}, {0, 0, 1}}};
  const ContextualReport r = contextual_mapping_check([](const Matrix& x) { return x; }, seqs);
  EXPECT_FALSE(r.distinct_ok);
  EXPECT_EQ(r.delta_measured, 0.0);
}

TEST(Contextual, AttentionSeparatesSharedToken) {
  Rng rng(2, "ctx-attn");
  const std::vector<Matrix> seqs{Matrix{{1, 0, 0}, {0, 1, 0}}, Matrix{{1, 0, 0}, {0, 0, 1}}};
  AttnParams p;
  p.w_q = rng.gaussian_matrix(3, 3);
  p.w_k = rng.gaussian_matrix(3, 3);
  p.w_v = rng.gaussian_matrix(3, 3);
  const ContextualReport r = contextual_mapping_check([&](const Matrix& x) { return attention(x, p); }, seqs);
  EXPECT_TRUE(r.distinct_ok);
  EXPECT_TRUE(r.delta_bound_ok);
  EXPECT_GE(std::log(r.delta_measured), r.log_guaranteed_delta);
  EXPECT_EQ(r.seq_len, 2u);
  EXPECT_EQ(r.vocabulary_size, 3u);
  EXPECT_NEAR(r.log_guaranteed_delta,
              log_delta_oracle(r.eps, 3.0, 3.0, r.kappa, r.gamma_max, 2.0), 1e-9 * std::abs(r.log_guaranteed_delta));
  EXPECT_DOUBLE_EQ(r.guaranteed_gamma, r.gamma_max + r.eps / 4.0);
}

TEST(Contextual, RepeatedTokenRejected) {
  const std::vector<Matrix> seqs{Matrix{{1, 0}, {1, 0}}};
  EXPECT_THROW(contextual_mapping_check([](const Matrix& x) { return x; }, seqs), PreconditionError);
}

TEST(FnDistance, ConstantDifference) {
  const Matrix c{{0.3, -0.4}, {1.2, 0.0}};
  const double est = estimate_fn_distance([](const Matrix& x) { return x; }, shift(c), {2, 2, -1, 1},
                                          FnNorm::kL2, 10000, 3);
  EXPECT_NEAR(est, frobenius_norm(c), 0.02 * frobenius_norm(c));
}

TEST(FnDistance, SupLowerBoundsTrueSup) {
  // |f - g| = |2 x| on [-1, 1]^(1x1): the true sup is 2 at the corners.
  const MatFn f = right(Matrix{{3}}), g = right(Matrix{{1}});
  const double sup = estimate_fn_distance(f, g, {1, 1, -1, 1}, FnNorm::kSup, 2000, 4);
  EXPECT_LE(sup, 2.0);
  EXPECT_GT(sup, 1.9);
  const double l2 = estimate_fn_distance(f, g, {1, 1, -1, 1}, FnNorm::kL2, 20000, 4);
  EXPECT_NEAR(l2, 2.0 / std::sqrt(3.0), 0.02);
}

TEST(FnDistance, SamplesArePrefixStable) {
  const Domain d{2, 3, -1, 1};
  const auto a = sample_domain(d, 5, 8), b = sample_domain(d, 50, 8);
  for (std::size_t k = 0; k < 5; ++k) EXPECT_EQ(a[k], b[k]);
}

TEST(Lipschitz, DiagonalApproachesFromBelow) {
  const double k = estimate_lipschitz(right(Matrix{{1, 0}, {0, 3}}), {1, 2, -1, 1}, 4000, 5);
  EXPECT_LE(k, 3.0 + 1e-12);
  EXPECT_GT(k, 2.9);
}

TEST(TwoLayer, TightnessWitness) {
  const double k1 = 1.7, eps1 = 0.3;
  const Matrix c{{eps1}};
  const MatFn f = right(Matrix{{k1}}), g = shift(c), phi = [](const Matrix& x) { return x; };
  const BoundReport r = two_layer_bound_check(f, g, f, phi, k1, eps1, 0.0, sampling(1, 1));
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.lhs_measured, k1 * eps1, 1e-9);
  EXPECT_NEAR(r.rhs_theoretical, k1 * eps1, 1e-12);
}

TEST(TwoLayer, RandomAffinePasses) {
  Rng rng(6, "two-layer");
  for (int k = 0; k < 20; ++k) {
    const Matrix a = rng.gaussian_matrix(2, 2), b = rng.gaussian_matrix(2, 2);
    const Matrix ct = rng.gaussian_matrix(3, 2, 0.1), cg = rng.gaussian_matrix(3, 2, 0.1);
    const MatFn f = right(a), tau = [a, ct](const Matrix& x) { return oracle::product(x, a) + ct; };
    const MatFn phi = right(b), g = [b, cg](const Matrix& x) { return oracle::product(x, b) + cg; };
    const double eps1 = frobenius_norm(cg), eps2 = frobenius_norm(ct);
    const BoundReport r = two_layer_bound_check(f, g, tau, phi, spectral_norm(a), eps1, eps2, sampling(3, 2));
    EXPECT_TRUE(r.pass) << k;
    EXPECT_LE(r.lhs_measured, spectral_norm(a) * eps1 + eps2 + 1e-7);
  }
}

TEST(TwoLayer, UnderstatedEpsFailsHypothesis) {
  const MatFn id = [](const Matrix& x) { return x; };
  const BoundReport r = two_layer_bound_check(id, shift(Matrix{{1.0}}), id, id, 1.0, 0.1, 0.0, sampling(1, 1));
  EXPECT_FALSE(r.hypotheses_met);
  EXPECT_FALSE(r.pass);
}

TEST(Substitution, DoublingChainWitness) {
  const double eps = 0.25;
  const MatFn two = right(Matrix{{2}});
  const std::vector<MatFn> vs{two, two, two, two};
  std::vector<MatFn> us = vs;
  us[0] = [](const Matrix& x) { return 2.0 * x + Matrix{{0.25}}; };
  const BoundReport r = one_layer_substitution_check(us, vs, 1, eps, 2.0, sampling(1, 1));
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.lhs_measured, 8 * eps, 1e-9);
  EXPECT_NEAR(r.rhs_theoretical, 8 * eps, 1e-12);
}

TEST(Substitution, NonlinearOuterLayerRejectedInLinearRegime) {
  const MatFn t = [](const Matrix& x) {
    Matrix y = x;
    for (double& v : y.data()) v = std::tanh(v);
    return y;
  };
  const std::vector<MatFn> vs{right(Matrix{{1}}), t};
  const std::vector<MatFn> us{shift(Matrix{{0.1}}), t};
  const BoundReport lin = one_layer_substitution_check(us, vs, 1, 0.1, 2.0, sampling(1, 1));
  EXPECT_FALSE(lin.hypotheses_met);
  const BoundReport lip =
      one_layer_substitution_check(us, vs, 1, 0.1, 2.0, sampling(1, 1), SubstitutionRegime::kLipschitz);
  EXPECT_TRUE(lip.pass);
}

TEST(Telescoping, RandomStacks) {
  Rng rng(7, "telescope");
  for (int k = 0; k < 10; ++k) {
    std::vector<MatFn> us, vs;
    for (int i = 0; i < 3; ++i) {
      const Matrix a = rng.gaussian_matrix(2, 2), c = rng.gaussian_matrix(1, 2, 0.2);
      vs.push_back(right(a));
      us.push_back([a, c](const Matrix& x) { return oracle::product(x, a) + c; });
    }
    const BoundReport r = telescoping_check(us, vs, sampling(1, 2));
    EXPECT_TRUE(r.pass);
    EXPECT_LE(r.lhs_measured, r.rhs_theoretical + 1e-9);
  }
}

TEST(Universality, RejectsSmallK2) {
  const MatFn id = [](const Matrix& x) { return x; };
  const std::vector<LayerPair> layers{{id, id}};
  const std::vector<double> one{1.0}, zero{0.0};
  try {
    universality_bound_check(layers, layers, 2.0, one, zero, zero, ResampleMode::kUp, sampling(1, 1));
    FAIL() << "K2 = 2 was accepted";
  } catch (const HypothesisError& e) {
    EXPECT_EQ(e.hypothesis(), "Assume K2 > 2");
  }
}

TEST(Universality, GeometricSumOnScaledLinearStack) {
  // Depth 2, K2 = 3: target and model differ by a constant shift after each linear layer.
  const double k2 = 3.0;
  const Matrix a{{1.2, 0.3}, {-0.4, 1.1}};
  const MatFn id = [](const Matrix& x) { return x; };
  const Matrix c{{0.05, -0.02}};
  std::vector<LayerPair> target, model;
  for (int i = 0; i < 2; ++i) {
    target.push_back({right(a), shift(c)});
    model.push_back({right(a), id});
  }
  const Sampling s = sampling(1, 2);
  const UniversalityConstants m = measure_universality_constants(target, model, s);
  ASSERT_LT(m.k2, k2);
  const BoundReport r = universality_bound_check(target, model, k2, m.k1s, m.eps1s, m.eps2s, ResampleMode::kUp, s);
  EXPECT_TRUE(r.pass);
  const double term = *r.extra("max_layer_term");
  EXPECT_NEAR(*r.extra("geometric_sum_bound"), (k2 * k2 - 1) / (k2 - 1) * term, 1e-12);
  EXPECT_NEAR(r.rhs_theoretical, k2 * k2 * term, 1e-12);
  EXPECT_LE(r.lhs_measured, *r.extra("geometric_sum_bound") + 1e-7);
}

TEST(Reports, FinalizeComputesSlack) {
  BoundReport r;
  r.lhs_measured = 1.0;
  r.rhs_theoretical = 1.5;
  r.finalize();
  EXPECT_TRUE(r.pass);
  EXPECT_DOUBLE_EQ(r.slack, 0.5);
  r.violate("broken");
  r.finalize();
  EXPECT_FALSE(r.pass);
  r.add("x", 2.0);
  EXPECT_EQ(r.extra("x"), 2.0);
  EXPECT_FALSE(r.extra("y").has_value());
}

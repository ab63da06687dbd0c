#include <algorithm>
#include <cmath>
#include <numeric>

#include "common.hpp"
#include "varapprox/nn.hpp"

namespace varapprox::suites {

namespace {

struct Fixture {
  std::vector<Matrix> sequences;
  std::size_t vocabulary = 0;
  std::size_t d = 0;
};

// Equal-length sequences of distinct tokens drawn from a Gaussian vocabulary
// (|V| <= 8, d <= 4, 2 <= L <= 4).
Fixture random_fixture(Rng& rng) {
  Fixture f;
  f.vocabulary = rng.uniform_int(2, 8);
  f.d = rng.uniform_int(1, 4);
  const Matrix vocab = rng.gaussian_matrix(f.vocabulary, f.d);
  const std::size_t count = rng.uniform_int(2, 4);
  const std::size_t len = rng.uniform_int(2, std::min<std::size_t>(4, f.vocabulary));
  for (std::size_t s = 0; s < count; ++s) {
    std::vector<std::size_t> ids(f.vocabulary);
    std::iota(ids.begin(), ids.end(), 0);
    for (std::size_t i = 0; i < len; ++i) std::swap(ids[i], ids[rng.uniform_int(i, f.vocabulary - 1)]);
    Matrix seq(len, f.d);
    for (std::size_t i = 0; i < len; ++i) {
      std::copy(vocab.row(ids[i]).begin(), vocab.row(ids[i]).end(), seq.row(i).begin());
    }
    f.sequences.push_back(std::move(seq));
  }
  return f;
}

AttnParams gaussian_attention(Rng& rng, std::size_t d) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  AttnParams p;
  p.w_q = rng.gaussian_matrix(d, d, scale);
  p.w_k = rng.gaussian_matrix(d, d, scale);
  p.w_v = rng.gaussian_matrix(d, d, scale);
  p.w_o = rng.gaussian_matrix(d, d, scale);
  return p;
}

CheckResult attention_distinct(const VerifyOptions& opts) {
  PropertyCheck c("contextual/attention_distinct", 0.0);
  Rng root = check_rng(opts, "contextual/attention_distinct");
  double min_delta = std::numeric_limits<double>::infinity();
  double min_log_margin = std::numeric_limits<double>::infinity();
  std::size_t pairs = 0;
  for (std::size_t k = 0; k < 100; ++k) {
    Rng rng = root.substream("trial/" + std::to_string(k));
    const Fixture f = random_fixture(rng);
    const AttnParams p = gaussian_attention(rng, f.d);
    const ContextualReport r =
        contextual_mapping_check([&](const Matrix& x) { return attention(x, p); }, f.sequences);
    const std::string tag = "trial " + std::to_string(k);
    c.expect(r.distinct_ok, tag + ": attention outputs coincide");
    c.expect(r.delta_bound_ok, tag + ": log delta " + num_str(std::log(r.delta_measured)) +
                                   " below guaranteed " + num_str(r.log_guaranteed_delta));
    pairs += r.pairs_compared;
    min_delta = std::min(min_delta, r.delta_measured);
    if (r.pairs_compared > 0) {
      min_log_margin = std::min(min_log_margin, std::log(r.delta_measured) - r.log_guaranteed_delta);
    }
  }
  c.metric("trials", 100);
  c.metric("pairs_compared", pairs);
  c.metric("min_delta_measured", json_number(min_delta));
  c.metric("min_log_margin", json_number(min_log_margin));
  c.metric("attention_with_w_o", true);
  return c.finish();
}

CheckResult identity_counterexample() {
  PropertyCheck c("contextual/identity_counterexample", 0.0);
  const Matrix x1{{1, 0, 0}, {0, 1, 0}};
  const Matrix x2{{1, 0, 0}, {0, 0, 1}};
  const std::vector<Matrix> seqs{x1, x2};
  const ContextualReport r = contextual_mapping_check([](const Matrix& x) { return x; }, seqs);
  c.expect(!r.distinct_ok, "identity was accepted as a contextual mapping");
  c.metric("report", to_json(r));
  return c.finish();
}

CheckResult separateness_basis() {
  PropertyCheck c("contextual/separateness_basis", 1e-12);
  const std::vector<Matrix> seqs{Matrix{{2, 0}}, Matrix{{0, 3}}};
  const SeparationReport r = check_separateness(seqs);
  c.trial(std::abs(r.gamma_min_measured - 2.0), "gamma_min");
  c.trial(std::abs(r.gamma_max_measured - 3.0), "gamma_max");
  c.trial(std::abs(r.delta_measured - std::sqrt(13.0)), "delta");
  c.expect(r.cls == SeparationClass::kTokenwise, "not classified tokenwise");

  const std::vector<Matrix> single{Matrix{{1, 1}}};
  const SeparationReport s = check_separateness(single);
  c.expect(std::isinf(s.delta_measured) && s.cls == SeparationClass::kTokenwise,
           "single token should give delta = +inf and tokenwise class");

  const std::vector<Matrix> repeated{Matrix{{1, 0}}, Matrix{{1, 0}, {0, 2}}};
  const SeparationReport t = check_separateness(repeated);
  c.trial(std::abs(t.delta_measured - std::sqrt(5.0)), "equal tokens across sequences");
  c.metric("basis", to_json(r));
  return c.finish();
}

// Independent pass over the flattened token list.
double delta_by_enumeration(const std::vector<Matrix>& seqs) {
  std::vector<std::vector<double>> all;
  for (const auto& s : seqs)
    for (std::size_t k = 0; k < s.rows(); ++k) all.emplace_back(s.row(k).begin(), s.row(k).end());
  double best = std::numeric_limits<double>::infinity();
  for (const auto& a : all) {
    for (const auto& b : all) {
      if (a == b) continue;
      double acc = 0.0;
      for (std::size_t l = 0; l < a.size(); ++l) acc += (a[l] - b[l]) * (a[l] - b[l]);
      best = std::min(best, std::sqrt(acc));
    }
  }
  return best;
}

CheckResult separateness_cross_check(const VerifyOptions& opts) {
  PropertyCheck c("contextual/separateness_cross_check", 0.0);
  Rng root = check_rng(opts, "contextual/separateness_cross_check");
  for (std::size_t k = 0; k < 50; ++k) {
    Rng rng = root.substream("trial/" + std::to_string(k));
    const Fixture f = random_fixture(rng);
    const SeparationReport r = check_separateness(f.sequences);
    const double oracle = delta_by_enumeration(f.sequences);
    c.trial(r.delta_measured == oracle ? 0.0 : std::abs(r.delta_measured - oracle),
            "trial " + std::to_string(k));
  }
  return c.finish();
}

CheckResult delta_formula() {
  PropertyCheck c("contextual/delta_formula", 1e-9);
  // exp(-5 / eps * |V|^4 * d * kappa * gamma_max * log L) at eps = 1, |V| = 2, d = 2, kappa = 2,
  // gamma_max = 1, L = 2 is exp(-5 * 16 * 2 * 2 * 1 * ln 2) = exp(-320 ln 2).
  const double got = log_contextual_delta(1.0, 2, 2, 2.0, 1.0, 2);
  const double expected = -320.0 * std::log(2.0);
  c.trial(std::abs(got - expected) / std::abs(expected), "log delta");
  c.metric("log_delta", got);
  c.metric("log_delta_over_ln2", got / std::log(2.0));
  return c.finish();
}

}  // namespace

std::vector<CheckResult> contextual(const VerifyOptions& opts) {
  return {attention_distinct(opts), identity_counterexample(), separateness_basis(),
          separateness_cross_check(opts), delta_formula()};
}

}  // namespace varapprox::suites

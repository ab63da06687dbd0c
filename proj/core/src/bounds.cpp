#include <algorithm>
#include <cmath>
#include <sstream>

#include "varapprox/analysis.hpp"
#include "varapprox/error.hpp"
#include "varapprox/rng.hpp"

namespace varapprox {

namespace {

double dist(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError("function distance: outputs differ in shape");
  }
  return frobenius_norm(a - b);
}

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

std::string fmt_num(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

// Applies fs[first] .. fs[last - 1] in order.
Matrix apply_range(std::span<const MatFn> fs, std::size_t first, std::size_t last, Matrix x) {
  for (std::size_t i = first; i < last; ++i) x = fs[i](x);
  return x;
}

void check_stack(std::span<const MatFn> us, std::span<const MatFn> vs) {
  if (us.empty() || us.size() != vs.size()) {
    throw ShapeError("composition check: u and v stacks must be non-empty and equally deep");
  }
}

BoundReport base_report(std::string name, const Sampling& s) {
  BoundReport r;
  r.name = std::move(name);
  r.samples = s.samples;
  r.norm_kind = std::string(to_string(s.norm));
  r.seeds = {s.seed};
  r.tolerance = s.tol;
  return r;
}

}  // namespace

std::string_view to_string(FnNorm n) noexcept { return n == FnNorm::kL2 ? "l2" : "sup"; }

FnNorm fn_norm_from_string(std::string_view name) {
  if (name == "l2") return FnNorm::kL2;
  if (name == "sup") return FnNorm::kSup;
  throw DomainError("unknown function norm '" + std::string(name) + "'");
}

std::string_view to_string(SubstitutionRegime r) noexcept {
  return r == SubstitutionRegime::kLinear ? "linear" : "lipschitz";
}

std::string_view to_string(ResampleMode m) noexcept {
  return m == ResampleMode::kUp ? "up" : "down";
}

std::vector<Matrix> sample_domain(const Domain& domain, std::size_t count, std::uint64_t seed) {
  Rng rng(seed, "domain");
  std::vector<Matrix> pts;
  pts.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    pts.push_back(rng.uniform_matrix(domain.rows, domain.cols, domain.lo, domain.hi));
  }
  return pts;
}

double aggregate(std::span<const double> pointwise, FnNorm norm) {
  if (pointwise.empty()) return 0.0;
  if (norm == FnNorm::kSup) return *std::max_element(pointwise.begin(), pointwise.end());
  double s = 0.0;
  for (double v : pointwise) s += v * v;
  return std::sqrt(s / static_cast<double>(pointwise.size()));
}

double fn_distance_on(const MatFn& f, const MatFn& g, std::span<const Matrix> points,
                      FnNorm norm) {
  std::vector<double> pw;
  pw.reserve(points.size());
  for (const auto& x : points) pw.push_back(dist(f(x), g(x)));
  return aggregate(pw, norm);
}

double estimate_fn_distance(const MatFn& f, const MatFn& g, const Domain& domain, FnNorm norm,
                            std::size_t samples, std::uint64_t seed) {
  if (samples == 0) throw DomainError("estimate_fn_distance: need at least one sample");
  const auto pts = sample_domain(domain, samples, seed);
  return fn_distance_on(f, g, pts, norm);
}

double estimate_lipschitz(const MatFn& f, const Domain& domain, std::size_t pairs,
                          std::uint64_t seed) {
  Rng rng(seed, "lipschitz");
  double best = 0.0;
  for (std::size_t k = 0; k < pairs; ++k) {
    const Matrix x = rng.uniform_matrix(domain.rows, domain.cols, domain.lo, domain.hi);
    const Matrix y = rng.uniform_matrix(domain.rows, domain.cols, domain.lo, domain.hi);
    best = std::max(best, ratio(dist(f(x), f(y)), frobenius_norm(x - y)));
  }
  return best;
}

std::optional<double> BoundReport::extra(std::string_view key) const {
  for (const auto& [k, v] : extras) {
    if (k == key) return v;
  }
  return std::nullopt;
}

void BoundReport::violate(std::string what) {
  hypotheses_met = false;
  notes.push_back("hypothesis violated: " + std::move(what));
}

void BoundReport::finalize() {
  slack = rhs_theoretical - lhs_measured;
  pass = hypotheses_met && lhs_measured <= rhs_theoretical + tolerance;
}

BoundReport two_layer_bound_check(const MatFn& f, const MatFn& g, const MatFn& tau,
                                  const MatFn& phi, std::optional<double> k1, double eps1,
                                  double eps2, const Sampling& s) {
  BoundReport r = base_report("two_layer", s);
  const auto pts = sample_domain(s.domain, s.samples, s.seed);
  std::vector<double> d_inner, d_outer, d_total;
  double k1_seen = 0.0;
  for (const auto& x : pts) {
    const Matrix gx = g(x);
    const Matrix px = phi(x);
    const Matrix fgx = f(gx);
    const Matrix fpx = f(px);
    const double gap = dist(gx, px);
    d_inner.push_back(gap);
    d_outer.push_back(dist(fpx, tau(px)));
    d_total.push_back(dist(fgx, tau(px)));
    k1_seen = std::max(k1_seen, ratio(dist(fgx, fpx), gap));
  }
  const double eps1_seen = aggregate(d_inner, s.norm);
  const double eps2_seen = aggregate(d_outer, s.norm);
  const double k1_used = k1.value_or(k1_seen);

  if (eps1_seen > eps1 + s.tol) {
    r.violate("||g - phi|| = " + fmt_num(eps1_seen) + " exceeds eps1 = " + fmt_num(eps1));
  }
  if (eps2_seen > eps2 + s.tol) {
    r.violate("||(f - tau) o phi|| = " + fmt_num(eps2_seen) + " exceeds eps2 = " + fmt_num(eps2));
  }
  if (k1 && k1_seen > *k1 * (1.0 + 1e-12) + s.tol) {
    r.violate("f is not K1-Lipschitz on sampled pairs: ratio " + fmt_num(k1_seen) + " > " +
              fmt_num(*k1));
  }
  r.lhs_measured = aggregate(d_total, s.norm);
  r.rhs_theoretical = k1_used * eps1 + eps2;
  r.add("eps1", eps1);
  r.add("eps2", eps2);
  r.add("eps1_measured", eps1_seen);
  r.add("eps2_measured", eps2_seen);
  r.add("k1_used", k1_used);
  r.add("k1_measured", k1_seen);
  r.finalize();
  return r;
}

BoundReport one_layer_substitution_check(std::span<const MatFn> us, std::span<const MatFn> vs,
                                         std::size_t j, double eps, double k2,
                                         const Sampling& s, SubstitutionRegime regime) {
  check_stack(us, vs);
  const std::size_t n = us.size();
  if (j == 0 || j > n) throw DomainError("one_layer_substitution_check: j must lie in [1, n]");
  BoundReport r = base_report("one_layer_substitution", s);
  r.notes.push_back(std::string("regime: ") + std::string(to_string(regime)));

  const auto pts = sample_domain(s.domain, s.samples, s.seed);
  std::vector<double> gaps, outs;
  double k2_seen = 0.0;
  double linearity_err = 0.0;
  for (const auto& x : pts) {
    const Matrix w = apply_range(us, 0, j - 1, x);
    Matrix a = us[j - 1](w);
    Matrix b = vs[j - 1](w);
    gaps.push_back(dist(a, b));
    for (std::size_t i = j; i < n; ++i) {
      const Matrix va = vs[i](a);
      const Matrix vb = vs[i](b);
      const Matrix diff = a - b;
      const double in = frobenius_norm(diff);
      if (regime == SubstitutionRegime::kLinear) {
        const Matrix vd = vs[i](diff);
        k2_seen = std::max(k2_seen, ratio(frobenius_norm(vd), in));
        const double scale = std::max({1.0, frobenius_norm(va), frobenius_norm(vb)});
        linearity_err = std::max(linearity_err, dist(va - vb, vd) / scale);
      } else {
        k2_seen = std::max(k2_seen, ratio(dist(va, vb), in));
      }
      a = va;
      b = vb;
    }
    outs.push_back(dist(a, b));
  }
  const double eps_seen = aggregate(gaps, s.norm);
  if (eps_seen > eps + s.tol) {
    r.violate("||u_j - v_j|| = " + fmt_num(eps_seen) + " exceeds eps = " + fmt_num(eps));
  }
  if (k2_seen > k2 * (1.0 + 1e-12) + s.tol) {
    r.violate("v_i growth " + fmt_num(k2_seen) + " exceeds K2 = " + fmt_num(k2));
  }
  if (regime == SubstitutionRegime::kLinear && linearity_err > 1e-9) {
    r.violate("v_i not linear on samples (relative error " + fmt_num(linearity_err) + ")");
  }
  r.lhs_measured = aggregate(outs, s.norm);
  r.rhs_theoretical = std::pow(k2, static_cast<double>(n - j)) * eps;
  r.add("n", static_cast<double>(n));
  r.add("j", static_cast<double>(j));
  r.add("eps", eps);
  r.add("eps_measured", eps_seen);
  r.add("k2", k2);
  r.add("k2_measured", k2_seen);
  r.finalize();
  return r;
}

BoundReport telescoping_check(std::span<const MatFn> us, std::span<const MatFn> vs,
                              const Sampling& s) {
  check_stack(us, vs);
  const std::size_t n = us.size();
  BoundReport r = base_report("telescoping", s);
  const auto pts = sample_domain(s.domain, s.samples, s.seed);
  std::vector<double> total;
  std::vector<std::vector<double>> terms(n);
  for (const auto& x : pts) {
    // hybrids[j] = v_n o ... o v_{j+1} o u_j o ... o u_1 (x)
    std::vector<Matrix> hybrids;
    hybrids.reserve(n + 1);
    Matrix prefix = x;
    for (std::size_t jj = 0; jj <= n; ++jj) {
      if (jj > 0) prefix = us[jj - 1](prefix);
      hybrids.push_back(apply_range(vs, jj, n, prefix));
    }
    total.push_back(dist(hybrids[n], hybrids[0]));
    for (std::size_t jj = 1; jj <= n; ++jj) terms[jj - 1].push_back(dist(hybrids[jj], hybrids[jj - 1]));
  }
  r.lhs_measured = aggregate(total, s.norm);
  double rhs = 0.0;
  for (std::size_t jj = 0; jj < n; ++jj) {
    const double t = aggregate(terms[jj], s.norm);
    r.add("term_" + std::to_string(jj + 1), t);
    rhs += t;
  }
  r.rhs_theoretical = rhs;
  r.add("n", static_cast<double>(n));
  r.finalize();
  return r;
}

namespace {

struct UniversalityWalk {
  std::vector<double> total;
  std::vector<std::vector<double>> inner_gap;
  std::vector<std::vector<double>> outer_gap;
  std::vector<double> k1_seen;
  double k2_seen = 0.0;
};

// Runs the target stack on every sample and records, per layer, the gaps the
// hypotheses talk about together with the ratios seen by the model layers on
// every hybrid pair.
UniversalityWalk walk_stacks(std::span<const LayerPair> target, std::span<const LayerPair> model,
                             const Sampling& s) {
  const std::size_t n = target.size();
  if (n == 0 || model.size() != n) {
    throw ShapeError("universality check: target and model stacks must be equally deep");
  }
  UniversalityWalk out;
  out.inner_gap.resize(n);
  out.outer_gap.resize(n);
  out.k1_seen.assign(n, 0.0);
  auto& total = out.total;
  auto& inner_gap = out.inner_gap;
  auto& outer_gap = out.outer_gap;
  auto& k1_seen = out.k1_seen;
  auto& k2_seen = out.k2_seen;
  auto v = [&](std::size_t i, const Matrix& x) { return model[i].outer(model[i].inner(x)); };

  const auto pts = sample_domain(s.domain, s.samples, s.seed);
  for (const auto& x : pts) {
    Matrix w = x;
    for (std::size_t i = 0; i < n; ++i) {
      const Matrix gx = target[i].inner(w);
      const Matrix px = model[i].inner(w);
      const Matrix fgx = target[i].outer(gx);
      const double gap = dist(gx, px);
      inner_gap[i].push_back(gap);
      outer_gap[i].push_back(dist(target[i].outer(px), model[i].outer(px)));
      k1_seen[i] = std::max(k1_seen[i], ratio(dist(fgx, target[i].outer(px)), gap));

      // hybrid pair entering the model layers above i
      Matrix a = fgx;
      Matrix b = v(i, w);
      for (std::size_t m = i + 1; m < n; ++m) {
        const Matrix va = v(m, a);
        const Matrix vb = v(m, b);
        k2_seen = std::max(k2_seen, ratio(dist(va, vb), dist(a, b)));
        a = va;
        b = vb;
      }
      w = fgx;
    }
    Matrix y = x;
    for (std::size_t i = 0; i < n; ++i) y = v(i, y);
    total.push_back(dist(w, y));
  }

  return out;
}

}  // namespace

UniversalityConstants measure_universality_constants(std::span<const LayerPair> target,
                                                     std::span<const LayerPair> model,
                                                     const Sampling& s) {
  const UniversalityWalk walk = walk_stacks(target, model, s);
  UniversalityConstants c;
  for (std::size_t i = 0; i < target.size(); ++i) {
    c.eps1s.push_back(aggregate(walk.inner_gap[i], s.norm));
    c.eps2s.push_back(aggregate(walk.outer_gap[i], s.norm));
    c.k1s.push_back(walk.k1_seen[i]);
  }
  c.k2 = walk.k2_seen;
  return c;
}

BoundReport universality_bound_check(std::span<const LayerPair> target,
                                     std::span<const LayerPair> model, double k2,
                                     std::span<const double> k1s, std::span<const double> eps1s,
                                     std::span<const double> eps2s, ResampleMode mode,
                                     const Sampling& s) {
  if (!(k2 > 2.0)) {
    throw HypothesisError("Assume K2 > 2", "got K2 = " + fmt_num(k2));
  }
  const std::size_t n = target.size();
  if (n == 0 || model.size() != n || k1s.size() != n || eps1s.size() != n || eps2s.size() != n) {
    throw ShapeError("universality check: stacks and constant lists must have equal length");
  }
  BoundReport r = base_report("universality", s);
  r.notes.push_back(std::string("mode: ") + std::string(to_string(mode)));

  const UniversalityWalk walk = walk_stacks(target, model, s);
  const auto& inner_gap = walk.inner_gap;
  const auto& outer_gap = walk.outer_gap;
  const auto& k1_seen = walk.k1_seen;
  const double k2_seen = walk.k2_seen;
  const auto& total = walk.total;

  double max_term = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e1 = aggregate(inner_gap[i], s.norm);
    const double e2 = aggregate(outer_gap[i], s.norm);
    const std::string tag = std::to_string(i + 1);
    if (e1 > eps1s[i] + s.tol) {
      r.violate("layer " + tag + ": ||g - phi|| = " + fmt_num(e1) + " exceeds eps1 = " + fmt_num(eps1s[i]));
    }
    if (e2 > eps2s[i] + s.tol) {
      r.violate("layer " + tag + ": ||f - tau|| = " + fmt_num(e2) + " exceeds eps2 = " + fmt_num(eps2s[i]));
    }
    if (k1_seen[i] > k1s[i] * (1.0 + 1e-12) + s.tol) {
      r.violate("layer " + tag + ": f ratio " + fmt_num(k1_seen[i]) + " exceeds K1 = " + fmt_num(k1s[i]));
    }
    const double term = k1s[i] * eps1s[i] + eps2s[i];
    max_term = std::max(max_term, term);
    r.add("eps1_measured_" + tag, e1);
    r.add("eps2_measured_" + tag, e2);
    r.add("k1_measured_" + tag, k1_seen[i]);
    r.add("layer_term_" + tag, term);
  }
  if (k2_seen > k2 * (1.0 + 1e-12) + s.tol) {
    r.violate("model layer ratio " + fmt_num(k2_seen) + " exceeds K2 = " + fmt_num(k2));
  }
  const double k2n = std::pow(k2, static_cast<double>(n));
  const double geometric = (k2n - 1.0) / (k2 - 1.0) * max_term;
  r.lhs_measured = aggregate(total, s.norm);
  r.rhs_theoretical = k2n * max_term;
  r.add("n", static_cast<double>(n));
  r.add("k2", k2);
  r.add("k2_measured", k2_seen);
  r.add("max_layer_term", max_term);
  r.add("geometric_sum_bound", geometric);
  r.add("measured_constant", max_term > 0.0 ? r.lhs_measured / max_term : 0.0);
  r.finalize();
  // The proof's intermediate form must hold as well.
  if (r.lhs_measured > geometric + s.tol || geometric > r.rhs_theoretical + s.tol) {
    r.pass = false;
    r.notes.push_back("geometric-sum intermediate bound failed");
  }
  return r;
}

}  // namespace varapprox

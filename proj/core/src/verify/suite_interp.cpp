#include <cmath>
#include <limits>

#include "common.hpp"
#include "varapprox/interp.hpp"

namespace varapprox::suites {

namespace {

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

InterpOptions kernel_for_trial(std::size_t k) {
  InterpOptions o;
  o.kernel = k % 2 == 0 ? KernelKind::kCubicBSpline : KernelKind::kKeysCatmullRom;
  return o;
}

CheckResult bspline_range() {
  PropertyCheck c("interp/bspline_range", 0.0);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int k = 0; k <= 6000; ++k) {
    const double x = -3.0 + 1e-3 * k;
    const double v = kernel_eval(KernelKind::kCubicBSpline, x);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    double err = std::max(0.0, -v) + std::max(0.0, v - 1.0);
    if (std::abs(x) >= 2.0) err += std::abs(v);
    c.trial(err, "W(" + num_str(x) + ") = " + num_str(v));
  }
  c.metric("min", lo);
  c.metric("max", hi);
  return c.finish();
}

CheckResult keys_minimum() {
  PropertyCheck c("interp/keys_negative_minimum", 1e-6);
  double lo = std::numeric_limits<double>::infinity();
  double arg = 0.0;
  for (int k = 0; k <= 6000; ++k) {
    const double x = -3.0 + 1e-3 * k;
    const double v = kernel_eval(KernelKind::kKeysCatmullRom, x);
    if (v < lo) {
      lo = v;
      arg = x;
    }
  }
  // a = -0.5 outer piece -x^3/2 + 5x^2/2 - 4x + 2 has its minimum -2/27 at x = 4/3.
  const double formula = -2.0 / 27.0;
  c.expect(lo < 0.0, "Keys kernel never went negative on the grid");
  c.trial(std::abs(lo - formula), "sampled minimum vs formula");
  c.metric("sampled_min", lo);
  c.metric("argmin", arg);
  c.metric("formula_min", formula);
  c.metric("violates_unit_range", lo < 0.0);
  return c.finish();
}

CheckResult operator_equivalence(const VerifyOptions& opts) {
  PropertyCheck c("interp/operator_equivalence", 1e-10);
  Rng root = check_rng(opts, "interp/operator_equivalence");
  for (std::size_t k = 0; k < 100; ++k) {
    Rng rng = root.substream("trial/" + std::to_string(k));
    const Shape2 src{rng.uniform_int(1, 6), rng.uniform_int(1, 6)};
    const Shape2 dst{rng.uniform_int(src.h, 12), rng.uniform_int(src.w, 12)};
    const std::size_t d = rng.uniform_int(1, 3);
    const InterpOptions o = kernel_for_trial(k);
    const TokenMap x = rng.gaussian_map(src.h, src.w, d);
    const UpInterpOp op = materialize_up(src, dst, o);
    const TokenMap direct = up_interpolate(x, dst.h, dst.w, o);
    c.trial(max_abs_diff(op.apply(x).data(), direct.data()), "trial " + std::to_string(k));
  }
  c.metric("cases", 100);
  return c.finish();
}

CheckResult row_sums(const VerifyOptions& opts) {
  PropertyCheck c("interp/row_sums", 1e-9);
  Rng root = check_rng(opts, "interp/row_sums");
  double worst_down = 0.0;
  for (std::size_t k = 0; k < 50; ++k) {
    Rng rng = root.substream("trial/" + std::to_string(k));
    const Shape2 src{rng.uniform_int(1, 6), rng.uniform_int(1, 6)};
    const Shape2 dst{rng.uniform_int(src.h, 12), rng.uniform_int(src.w, 12)};
    const UpInterpOp op = materialize_up(src, dst, kernel_for_trial(k));
    for (std::size_t i = 0; i < op.matrix.rows(); ++i) {
      double s = 0.0;
      for (double v : op.matrix.row(i)) s += v;
      c.trial(std::abs(s - 1.0), "up row " + std::to_string(i));
    }
    const std::size_t r = rng.uniform_int(1, 3);
    const DownSampleOp down = materialize_down({r * rng.uniform_int(1, 4), r * rng.uniform_int(1, 4)}, r);
    for (std::size_t i = 0; i < down.matrix.rows(); ++i) {
      double s = 0.0;
      for (double v : down.matrix.row(i)) s += v;
      worst_down = std::max(worst_down, std::abs(s - 1.0));
    }
  }
  c.expect(worst_down <= 1e-12, "down-sample row sums off by " + num_str(worst_down));
  c.metric("worst_down_row_error", worst_down);
  return c.finish();
}

CheckResult constant_preservation(const VerifyOptions& opts) {
  PropertyCheck c("interp/constant_preservation", 1e-10);
  Rng root = check_rng(opts, "interp/constant_preservation");
  for (std::size_t k = 0; k < 50; ++k) {
    Rng rng = root.substream("trial/" + std::to_string(k));
    const Shape2 src{rng.uniform_int(1, 6), rng.uniform_int(1, 6)};
    const Shape2 dst{rng.uniform_int(src.h, 12), rng.uniform_int(src.w, 12)};
    const std::size_t d = rng.uniform_int(1, 3);
    const double value = rng.uniform(-5.0, 5.0);
    const TokenMap up = up_interpolate(TokenMap(src.h, src.w, d, value), dst.h, dst.w, kernel_for_trial(k));
    double err = 0.0;
    for (double v : up.data()) err = std::max(err, std::abs(v - value));
    c.trial(err, "up trial " + std::to_string(k));
    const std::size_t r = rng.uniform_int(1, 3);
    const TokenMap down = down_sample(TokenMap(2 * r, 3 * r, d, value), r);
    err = 0.0;
    for (double v : down.data()) err = std::max(err, std::abs(v - value));
    c.trial(err, "down trial " + std::to_string(k));
  }
  return c.finish();
}

CheckResult linearity(const VerifyOptions& opts) {
  PropertyCheck c("interp/linearity", 1e-10);
  Rng root = check_rng(opts, "interp/linearity");
  for (std::size_t k = 0; k < 50; ++k) {
    Rng rng = root.substream("trial/" + std::to_string(k));
    const Shape2 src{rng.uniform_int(1, 6), rng.uniform_int(1, 6)};
    const Shape2 dst{rng.uniform_int(src.h, 12), rng.uniform_int(src.w, 12)};
    const std::size_t d = rng.uniform_int(1, 3);
    const InterpOptions o = kernel_for_trial(k);
    const TokenMap t1 = rng.gaussian_map(src.h, src.w, d);
    const TokenMap t2 = rng.gaussian_map(src.h, src.w, d);
    const double a = rng.normal();
    const double b = rng.normal();
    const TokenMap lhs = up_interpolate(a * t1 + b * t2, dst.h, dst.w, o);
    const TokenMap rhs = a * up_interpolate(t1, dst.h, dst.w, o) + b * up_interpolate(t2, dst.h, dst.w, o);
    c.trial(max_abs_diff(lhs.data(), rhs.data()), "trial " + std::to_string(k));
  }
  return c.finish();
}

CheckResult channel_independence(const VerifyOptions& opts) {
  PropertyCheck c("interp/channel_independence", 0.0);
  Rng root = check_rng(opts, "interp/channel_independence");
  for (std::size_t k = 0; k < 30; ++k) {
    Rng rng = root.substream("trial/" + std::to_string(k));
    const Shape2 src{rng.uniform_int(1, 5), rng.uniform_int(1, 5)};
    const Shape2 dst{rng.uniform_int(src.h, 10), rng.uniform_int(src.w, 10)};
    const std::size_t d = 3;
    const TokenMap t = rng.gaussian_map(src.h, src.w, d);
    TokenMap swapped(src.h, src.w, d);
    for (std::size_t i = 0; i < src.h; ++i)
      for (std::size_t j = 0; j < src.w; ++j)
        for (std::size_t l = 0; l < d; ++l) swapped(i, j, l) = t(i, j, (l + 1) % d);
    const TokenMap a = up_interpolate(t, dst.h, dst.w);
    const TokenMap b = up_interpolate(swapped, dst.h, dst.w);
    double err = 0.0;
    for (std::size_t i = 0; i < dst.h; ++i)
      for (std::size_t j = 0; j < dst.w; ++j)
        for (std::size_t l = 0; l < d; ++l) err = std::max(err, std::abs(b(i, j, l) - a(i, j, (l + 1) % d)));
    c.trial(err, "trial " + std::to_string(k));
  }
  return c.finish();
}

CheckResult pyramid_base_identity(const VerifyOptions& opts) {
  PropertyCheck c("interp/pyramid_base_identity", 0.0);
  Rng root = check_rng(opts, "interp/pyramid_base_identity");
  for (std::size_t k = 0; k < 20; ++k) {
    Rng rng = root.substream("trial/" + std::to_string(k));
    const std::size_t d = rng.uniform_int(1, 8);
    const TokenMap x_init = rng.gaussian_map(1, 1, d, 10.0);
    const std::vector<Shape2> schedule{{1, 1}};
    const auto ys = pyramid_up({}, x_init, schedule, kernel_for_trial(k));
    c.expect(ys.size() == 1 && ys.front() == x_init, "pyramid level 1 altered X_init");
    c.expect(up_interpolate(x_init, 1, 1, kernel_for_trial(k)) == x_init,
             "1x1 -> 1x1 up-interpolation altered the map");
  }
  return c.finish();
}

CheckResult pyramid_schedule(const VerifyOptions& opts) {
  PropertyCheck c("interp/pyramid_schedule", 0.0);
  Rng rng = check_rng(opts, "interp/pyramid_schedule");
  const std::vector<Shape2> schedule{{1, 1}, {2, 2}, {4, 4}};
  const std::vector<TokenMap> maps{rng.gaussian_map(1, 1, 2), rng.gaussian_map(2, 2, 2)};
  const TokenMap x_init = rng.gaussian_map(1, 1, 2);
  const auto ys = pyramid_up(maps, x_init, schedule);
  c.expect(ys.size() == 3, "expected three output maps");
  for (std::size_t i = 0; i < ys.size() && i < schedule.size(); ++i) {
    c.expect(ys[i].shape() == schedule[i], "level " + std::to_string(i + 1) + " has the wrong shape");
  }
  return c.finish();
}

CheckResult down_equivalence(const VerifyOptions& opts) {
  PropertyCheck c("interp/down_matrix_equivalence", 1e-12);
  Rng root = check_rng(opts, "interp/down_matrix_equivalence");
  for (std::size_t k = 0; k < 50; ++k) {
    Rng rng = root.substream("trial/" + std::to_string(k));
    const std::size_t r = rng.uniform_int(1, 4);
    const Shape2 src{r * rng.uniform_int(1, 3), r * rng.uniform_int(1, 3)};
    const TokenMap t = rng.gaussian_map(src.h, src.w, rng.uniform_int(1, 3));
    const DownSampleOp op = materialize_down(src, r);
    c.trial(max_abs_diff(op.apply(t).data(), down_sample(t, r).data()), "trial " + std::to_string(k));
  }
  return c.finish();
}

}  // namespace

std::vector<CheckResult> interp(const VerifyOptions& opts) {
  return {bspline_range(),
          keys_minimum(),
          operator_equivalence(opts),
          row_sums(opts),
          constant_preservation(opts),
          linearity(opts),
          channel_independence(opts),
          pyramid_base_identity(opts),
          pyramid_schedule(opts),
          down_equivalence(opts)};
}

}  // namespace varapprox::suites

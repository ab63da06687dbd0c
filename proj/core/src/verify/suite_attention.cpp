#include <algorithm>
#include <cmath>
#include <numeric>

#include "common.hpp"
#include "varapprox/nn.hpp"
#include "varapprox/var_model.hpp"

namespace varapprox::suites {

namespace {

AttnParams random_attn(Rng& rng, std::size_t d) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  AttnParams p;
  p.w_q = rng.gaussian_matrix(d, d, scale);
  p.w_k = rng.gaussian_matrix(d, d, scale);
  p.w_v = rng.gaussian_matrix(d, d, scale);
  return p;
}

Matrix permute_rows(const Matrix& x, const std::vector<std::size_t>& perm) {
  Matrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    std::copy(x.row(perm[i]).begin(), x.row(perm[i]).end(), out.row(i).begin());
  }
  return out;
}

double max_abs(const Matrix& m) {
  double r = 0.0;
  for (double v : m.data()) r = std::max(r, std::abs(v));
  return r;
}

CheckResult row_stochastic(const VerifyOptions& opts) {
  PropertyCheck c("attention/row_stochastic", 1e-12);
  Rng root = check_rng(opts, "attention/row_stochastic");
  for (std::size_t k = 0; k < 100; ++k) {
    Rng rng = root.substream("trial/" + std::to_string(k));
    const std::size_t n = rng.uniform_int(1, 8);
    const std::size_t d = rng.uniform_int(1, 4);
    const Matrix x = rng.gaussian_matrix(n, d, 2.0);
    const Matrix a = attention_weights(x, random_attn(rng, d));
    double err = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
      double s = 0.0;
      for (double v : a.row(i)) {
        s += v;
        if (!(v > 0.0)) err = std::numeric_limits<double>::infinity();
      }
      err = std::max(err, std::abs(s - 1.0));
    }
    c.trial(err, "trial " + std::to_string(k));
  }
  return c.finish();
}

CheckResult permutation_equivariance(const VerifyOptions& opts) {
  PropertyCheck c("attention/permutation_equivariance", 1e-10);
  Rng root = check_rng(opts, "attention/permutation_equivariance");
  for (std::size_t k = 0; k < 100; ++k) {
    Rng rng = root.substream("trial/" + std::to_string(k));
    const std::size_t n = rng.uniform_int(1, 8);
    const std::size_t d = rng.uniform_int(1, 4);
    const Matrix x = rng.gaussian_matrix(n, d, 2.0);
    const AttnParams p = random_attn(rng, d);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.uniform_int(0, i - 1)]);
    const Matrix lhs = attention(permute_rows(x, perm), p);
    const Matrix rhs = permute_rows(attention(x, p), perm);
    c.trial(max_abs(lhs - rhs), "trial " + std::to_string(k));
  }
  return c.finish();
}

CheckResult softmax_shift(const VerifyOptions& opts) {
  PropertyCheck c("attention/softmax_shift_invariance", 1e-12);
  Rng root = check_rng(opts, "attention/softmax_shift_invariance");
  for (std::size_t k = 0; k < 100; ++k) {
    Rng rng = root.substream("trial/" + std::to_string(k));
    const auto z = rng.gaussian_vector(rng.uniform_int(1, 8), 3.0);
    const double shift = rng.uniform(-50.0, 50.0);
    auto zs = z;
    for (double& v : zs) v += shift;
    const auto p = softmax(z);
    const auto q = softmax(zs);
    double err = 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      err = std::max(err, std::abs(p[i] - q[i]));
      sum += p[i];
    }
    c.trial(std::max(err, std::abs(sum - 1.0)), "trial " + std::to_string(k));
  }
  return c.finish();
}

CheckResult uniform_attention(const VerifyOptions& opts) {
  PropertyCheck c("attention/uniform_when_wq_zero", 1e-12);
  Rng root = check_rng(opts, "attention/uniform_when_wq_zero");
  for (std::size_t k = 0; k < 50; ++k) {
    Rng rng = root.substream("trial/" + std::to_string(k));
    const std::size_t n = rng.uniform_int(1, 8);
    const std::size_t d = rng.uniform_int(1, 4);
    const Matrix x = rng.gaussian_matrix(n, d);
    AttnParams p = random_attn(rng, d);
    p.w_q = Matrix(d, d, 0.0);
    Matrix mean(1, d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t l = 0; l < d; ++l) mean(0, l) += x(i, l) / static_cast<double>(n);
    const Matrix expected_row = matmul(mean, p.w_v);
    const Matrix out = attention(x, p);
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t l = 0; l < d; ++l) err = std::max(err, std::abs(out(i, l) - expected_row(0, l)));
    c.trial(err, "trial " + std::to_string(k));
  }
  return c.finish();
}

ScaleSchedule three_level(std::size_t d) { return ScaleSchedule{{{1, 1}, {2, 2}, {4, 4}}, d}; }

CheckResult var_shape_ledger(const VerifyOptions& opts) {
  PropertyCheck c("attention/var_shape_ledger", 0.0);
  Rng rng = check_rng(opts, "attention/var_shape_ledger");
  for (BlockOrder order : {BlockOrder::kFfnAttnUp, BlockOrder::kGAttnUp}) {
    const VarStackParams p = random_var_stack(three_level(2), 2, 4, rng, {}, order);
    const TokenMap x_init = rng.gaussian_map(1, 1, 2);
    const VarForwardResult r = var_forward(x_init, p);
    const std::string tag = std::string(to_string(order));
    c.expect(r.output.rows() == 21 && r.output.cols() == 2,
             tag + ": output is " + std::to_string(r.output.rows()) + "x" + std::to_string(r.output.cols()));
    c.expect(r.row_ledger == std::vector<std::size_t>{1, 5, 21}, tag + ": ledger is not 1, 5, 21");
    c.metric(tag + "_rows", r.output.rows());
  }
  return c.finish();
}

VarStackParams linear_stack(Rng& rng, std::size_t d) {
  VarStackParams p = random_var_stack(three_level(d), d, 3, rng);
  for (auto& level : p.levels) {
    level.attn.w_q = Matrix(level.attn.w_q.rows(), level.attn.w_q.cols(), 0.0);
    level.ffn.w1 = Matrix(level.ffn.w1.rows(), level.ffn.w1.cols(), 0.0);
    std::fill(level.ffn.b1.begin(), level.ffn.b1.end(), -1.0);
  }
  return p;
}

CheckResult var_superposition(const VerifyOptions& opts) {
  PropertyCheck c("attention/var_affine_superposition", 1e-9);
  Rng root = check_rng(opts, "attention/var_affine_superposition");
  for (std::size_t k = 0; k < 20; ++k) {
    Rng rng = root.substream("trial/" + std::to_string(k));
    const std::size_t d = rng.uniform_int(1, 3);
    const VarStackParams p = linear_stack(rng, d);
    const TokenMap x = rng.gaussian_map(1, 1, d);
    const TokenMap y = rng.gaussian_map(1, 1, d);
    const double a = rng.normal();
    const double b = rng.normal();
    const Matrix f0 = var_forward(TokenMap(1, 1, d, 0.0), p).output;
    const Matrix fx = var_forward(x, p).output - f0;
    const Matrix fy = var_forward(y, p).output - f0;
    const Matrix fxy = var_forward(a * x + b * y, p).output - f0;
    c.trial(max_abs(fxy - (a * fx + b * fy)), "trial " + std::to_string(k));
  }
  return c.finish();
}

CheckResult var_determinism(const VerifyOptions& opts) {
  PropertyCheck c("attention/var_determinism", 0.0);
  for (std::size_t k = 0; k < 3; ++k) {
    Rng r1 = check_rng(opts, "attention/var_determinism").substream("trial/" + std::to_string(k));
    Rng r2 = check_rng(opts, "attention/var_determinism").substream("trial/" + std::to_string(k));
    const VarStackParams p1 = random_var_stack(three_level(2), 2, 4, r1);
    const VarStackParams p2 = random_var_stack(three_level(2), 2, 4, r2);
    const TokenMap x1 = r1.gaussian_map(1, 1, 2);
    const TokenMap x2 = r2.gaussian_map(1, 1, 2);
    c.expect(var_forward(x1, p1).output == var_forward(x2, p2).output, "outputs differ under one seed");
  }
  return c.finish();
}

CheckResult minimal_class(const VerifyOptions& opts) {
  PropertyCheck c("attention/t114_class", 0.0);
  Rng rng = check_rng(opts, "attention/t114_class");
  const std::size_t d = 3;
  VarBlock block;
  block.params = random_level(d, 1, 4, rng);
  block.up = UpPlan{{{2, 2}}, {{2, 2}}};
  const VarNetwork net = compose_class({block, block});
  c.expect(block.function_class() == FunctionClass{1, 1, 4}, "block is not in T^{1,1,4}");
  c.expect(net.belongs_to(FunctionClass{1, 1, 4}), "composition left T^{1,1,4}");
  const Matrix x = rng.gaussian_matrix(4, d);
  c.expect(net(x).rows() == 4 && net(x).cols() == d, "composed network changed the shape");
  return c.finish();
}

}  // namespace

std::vector<CheckResult> attention(const VerifyOptions& opts) {
  return {row_stochastic(opts),   permutation_equivariance(opts), softmax_shift(opts),
          uniform_attention(opts), var_shape_ledger(opts),        var_superposition(opts),
          var_determinism(opts),  minimal_class(opts)};
}

}  // namespace varapprox::suites

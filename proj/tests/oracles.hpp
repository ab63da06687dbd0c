#pragma once

// Independent reference implementations used only by the tests.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "varapprox/interp.hpp"
#include "varapprox/nn.hpp"
#include "varapprox/tensor.hpp"

namespace oracle {

using varapprox::Matrix;
using varapprox::TokenMap;

inline Matrix product(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
      out(i, j) = acc;
    }
  return out;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) { return max_abs_diff(a.data(), b.data()); }
inline double max_abs_diff(const TokenMap& a, const TokenMap& b) { return max_abs_diff(a.data(), b.data()); }

inline double bspline(double x) {
  x = std::abs(x);
  if (x < 1.0) return (3 * x * x * x - 6 * x * x + 4) / 6.0;
  if (x < 2.0) return (2 - x) * (2 - x) * (2 - x) / 6.0;
  return 0.0;
}

inline double keys(double x) {
  const double a = -0.5;
  x = std::abs(x);
  if (x <= 1.0) return (a + 2) * x * x * x - (a + 3) * x * x + 1;
  if (x < 2.0) return a * x * x * x - 5 * a * x * x + 8 * a * x - 4 * a;
  return 0.0;
}

// Weight every source index along one axis receives for output index i.
inline std::vector<double> axis_weights(std::size_t i, std::size_t src, std::size_t dst,
                                        varapprox::KernelKind kind) {
  std::vector<double> w(src, 0.0);
  if (src == dst) {
    w[i] = 1.0;
    return w;
  }
  double anchor = (static_cast<double>(i) + 0.5) * static_cast<double>(src) / static_cast<double>(dst) - 0.5;
  anchor = std::min(std::max(anchor, 0.0), static_cast<double>(src - 1));
  const long base = static_cast<long>(std::floor(anchor));
  double total = 0.0;
  for (long t = base - 1; t <= base + 2; ++t) {
    const double k = kind == varapprox::KernelKind::kCubicBSpline ? bspline(static_cast<double>(t) - anchor)
                                                                  : keys(static_cast<double>(t) - anchor);
    const long idx = std::min(std::max(t, 0L), static_cast<long>(src) - 1);
    w[static_cast<std::size_t>(idx)] += k;
    total += k;
  }
  for (double& v : w) v /= total;
  return w;
}

// Brute force over every source pixel for every output pixel.
inline TokenMap up_interpolate(const TokenMap& x, std::size_t dh, std::size_t dw,
                               varapprox::KernelKind kind) {
  TokenMap out(dh, dw, x.d());
  for (std::size_t i = 0; i < dh; ++i) {
    const auto wr = axis_weights(i, x.h(), dh, kind);
    for (std::size_t j = 0; j < dw; ++j) {
      const auto wc = axis_weights(j, x.w(), dw, kind);
      for (std::size_t p = 0; p < x.h(); ++p)
        for (std::size_t q = 0; q < x.w(); ++q)
          for (std::size_t l = 0; l < x.d(); ++l) out(i, j, l) += wr[p] * wc[q] * x(p, q, l);
    }
  }
  return out;
}

inline TokenMap block_mean(const TokenMap& x, std::size_t r) {
  TokenMap out(x.h() / r, x.w() / r, x.d());
  for (std::size_t i = 0; i < x.h(); ++i)
    for (std::size_t j = 0; j < x.w(); ++j)
      for (std::size_t l = 0; l < x.d(); ++l) out(i / r, j / r, l) += x(i, j, l) / static_cast<double>(r * r);
  return out;
}

// Softmax without shifting; fine for the small logits used in tests.
inline Matrix attention(const Matrix& x, const varapprox::AttnParams& p) {
  const Matrix q = product(x, p.w_q), k = product(x, p.w_k), v = product(x, p.w_v);
  const std::size_t n = x.rows();
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double dot = 0.0;
      for (std::size_t l = 0; l < q.cols(); ++l) dot += q(i, l) * k(j, l);
      a(i, j) = std::exp(dot);
      z += a(i, j);
    }
    for (std::size_t j = 0; j < n; ++j) a(i, j) /= z;
  }
  Matrix out = product(a, v);
  if (p.w_o) out = product(out, *p.w_o);
  return out;
}

inline Matrix layer_norm(const Matrix& x, double eps) {
  Matrix out(x.rows(), x.cols());
  const double c = static_cast<double>(x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double mu = 0.0;
    for (std::size_t l = 0; l < x.cols(); ++l) mu += x(i, l) / c;
    double var = 0.0;
    for (std::size_t l = 0; l < x.cols(); ++l) var += (x(i, l) - mu) * (x(i, l) - mu) / c;
    for (std::size_t l = 0; l < x.cols(); ++l) out(i, l) = (x(i, l) - mu) / std::sqrt(var + eps);
  }
  return out;
}

inline TokenMap conv3x3(const TokenMap& x, const varapprox::ConvParams& p) {
  TokenMap out(x.h(), x.w(), p.kernels.size());
  for (std::size_t l = 0; l < p.kernels.size(); ++l)
    for (std::size_t i = 0; i < x.h(); ++i)
      for (std::size_t j = 0; j < x.w(); ++j) {
        double acc = p.bias;
        for (int m = -1; m <= 1; ++m)
          for (int n = -1; n <= 1; ++n) {
            const long si = static_cast<long>(i) + m, sj = static_cast<long>(j) + n;
            if (si < 0 || sj < 0 || si >= static_cast<long>(x.h()) || sj >= static_cast<long>(x.w())) continue;
            for (std::size_t c = 0; c < x.d(); ++c)
              acc += x(static_cast<std::size_t>(si), static_cast<std::size_t>(sj), c) *
                     p.kernels[l](static_cast<std::size_t>(m + 1), static_cast<std::size_t>(n + 1), c);
          }
        out(i, j, l) = acc;
      }
  return out;
}

}  // namespace oracle

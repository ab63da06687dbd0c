#include "varapprox/nn.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "varapprox/error.hpp"

namespace varapprox {

void AttnParams::validate() const {
  if (w_q.rows() != w_k.rows() || w_q.cols() != w_k.cols() || w_q.empty()) {
    throw ShapeError("attention: W_Q and W_K must share a non-empty d x s shape");
  }
  if (w_v.rows() != w_q.rows()) throw ShapeError("attention: W_V must have d rows");
  if (w_o && w_o->rows() != w_v.cols()) {
    throw ShapeError("attention: W_O rows must equal W_V columns");
  }
}

void FfnParams::validate() const {
  if (w1.empty() || w2.rows() != w1.cols() || w2.cols() != w1.rows() || b1.size() != w1.rows() ||
      b2.size() != w1.cols()) {
    std::ostringstream os;
    os << "ffn: inconsistent shapes W1 " << w1.rows() << "x" << w1.cols() << ", W2 " << w2.rows()
       << "x" << w2.cols() << ", b1 " << b1.size() << ", b2 " << b2.size();
    throw ShapeError(os.str());
  }
}

std::vector<double> softmax(std::span<const double> z) {
  if (z.empty()) return {};
  const double mx = *std::max_element(z.begin(), z.end());
  std::vector<double> out(z.size());
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    out[i] = std::exp(z[i] - mx);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

Matrix attention_weights(const Matrix& x, const AttnParams& p) {
  p.validate();
  if (x.cols() != p.model_dim() || x.rows() == 0) {
    std::ostringstream os;
    os << "attention: input is " << x.rows() << "x" << x.cols() << " but weights expect d="
       << p.model_dim();
    throw ShapeError(os.str());
  }
  const Matrix q = matmul(x, p.w_q);
  const Matrix k = matmul(x, p.w_k);
  const std::size_t n = x.rows();
  Matrix weights(n, n);
  std::vector<double> logits(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < q.cols(); ++c) s += q(i, c) * k(j, c);
      logits[j] = s;
    }
    const auto probs = softmax(logits);
    std::copy(probs.begin(), probs.end(), weights.row(i).begin());
  }
  return weights;
}

Matrix attention(const Matrix& x, const AttnParams& p) {
  const Matrix weights = attention_weights(x, p);
  Matrix out = matmul(weights, matmul(x, p.w_v));
  if (p.w_o) out = matmul(out, *p.w_o);
  return out;
}

Matrix ffn(const Matrix& x, const FfnParams& p) {
  p.validate();
  if (x.cols() != p.model_dim()) throw ShapeError("ffn: token dimension != W1 columns");
  const std::size_t c = p.hidden();
  const std::size_t d = p.model_dim();
  Matrix out = x;
  std::vector<double> hidden(c);
  for (std::size_t k = 0; k < x.rows(); ++k) {
    const auto xk = x.row(k);
    for (std::size_t a = 0; a < c; ++a) {
      double s = p.b1[a];
      for (std::size_t b = 0; b < d; ++b) s += p.w1(a, b) * xk[b];
      hidden[a] = std::max(s, 0.0);
    }
    auto yk = out.row(k);
    for (std::size_t b = 0; b < d; ++b) {
      double s = p.b2[b];
      for (std::size_t a = 0; a < c; ++a) s += p.w2(b, a) * hidden[a];
      yk[b] += s;
    }
  }
  return out;
}

Matrix mlp(const Matrix& x, const Matrix& w, std::span<const double> b) {
  if (x.cols() != w.rows()) throw ShapeError("mlp: input width != W rows");
  if (b.size() != w.cols()) throw ShapeError("mlp: bias length != W columns");
  return add_row_bias(matmul(x, w), b);
}

Matrix layer_norm(const Matrix& x, double eps) {
  if (eps < 0.0) throw DomainError("layer_norm: eps must be nonnegative");
  if (x.cols() == 0) throw ShapeError("layer_norm: zero channels");
  const double c = static_cast<double>(x.cols());
  Matrix out(x.rows(), x.cols());
  for (std::size_t j = 0; j < x.rows(); ++j) {
    const auto r = x.row(j);
    double mean = 0.0;
    for (double v : r) mean += v;
    mean /= c;
    double var = 0.0;
    for (double v : r) var += (v - mean) * (v - mean);
    var /= c;
    const double denom = std::sqrt(var + eps);
    if (denom == 0.0) {
      std::ostringstream os;
      os << "layer_norm: row " << j << " has zero variance and eps = 0";
      throw DomainError(os.str());
    }
    auto o = out.row(j);
    for (std::size_t k = 0; k < r.size(); ++k) o[k] = (r[k] - mean) / denom;
  }
  return out;
}

TokenMap conv3x3(const TokenMap& t, const ConvParams& p) {
  if (p.kernels.empty()) throw ShapeError("conv3x3: no kernels");
  for (const auto& k : p.kernels) {
    if (k.h() != 3 || k.w() != 3 || k.d() != t.d()) {
      throw ShapeError("conv3x3: every kernel must be 3x3 x c_in");
    }
  }
  const long long h = static_cast<long long>(t.h());
  const long long w = static_cast<long long>(t.w());
  TokenMap out(t.h(), t.w(), p.kernels.size());
  for (long long i = 0; i < h; ++i)
    for (long long j = 0; j < w; ++j)
      for (std::size_t l = 0; l < p.kernels.size(); ++l) {
        const TokenMap& k = p.kernels[l];
        double s = p.bias;
        for (long long m = 0; m < 3; ++m)
          for (long long n = 0; n < 3; ++n) {
            const long long si = i + m - 1;
            const long long sj = j + n - 1;
            if (si < 0 || sj < 0 || si >= h || sj >= w) continue;  // zero padding
            for (std::size_t c = 0; c < t.d(); ++c) {
              s += t(static_cast<std::size_t>(si), static_cast<std::size_t>(sj), c) *
                   k(static_cast<std::size_t>(m), static_cast<std::size_t>(n), c);
            }
          }
        out(static_cast<std::size_t>(i), static_cast<std::size_t>(j), l) = s;
      }
  return out;
}

}  // namespace varapprox

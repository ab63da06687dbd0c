#pragma once

#include <optional>
#include <span>
#include <vector>

#include "varapprox/tensor.hpp"

namespace varapprox {

/// Single-head attention weights in row-vector convention.
///
/// Logits are X W_Q W_K^T X^T, so W_Q and W_K are d x s (s = head size).
/// Values are X W_V with W_V d x e. When W_O (e x d_out) is present the
/// output is right-multiplied by it; a head of size 1 therefore uses
/// W_V d x 1 and W_O 1 x d.
struct AttnParams {
  Matrix w_q;
  Matrix w_k;
  Matrix w_v;
  std::optional<Matrix> w_o;

  std::size_t model_dim() const noexcept { return w_q.rows(); }
  std::size_t head_size() const noexcept { return w_q.cols(); }
  std::size_t output_dim() const noexcept { return w_o ? w_o->cols() : w_v.cols(); }
  /// Throws ShapeError if the matrices cannot be chained.
  void validate() const;
};

/// Tokenwise residual ReLU network: x + W2 ReLU(W1 x + b1) + b2.
struct FfnParams {
  Matrix w1;               // c x d
  std::vector<double> b1;  // c
  Matrix w2;               // d x c
  std::vector<double> b2;  // d

  std::size_t hidden() const noexcept { return w1.rows(); }
  std::size_t model_dim() const noexcept { return w1.cols(); }
  void validate() const;
};

/// 3x3 convolution, padding 1, stride 1. kernels[l] is the l-th 3 x 3 x c_in kernel.
struct ConvParams {
  std::vector<TokenMap> kernels;
  double bias = 0.0;
};

/// Max-shifted softmax.
std::vector<double> softmax(std::span<const double> z);

/// Row-normalized attention matrix D^{-1} A (n x n), A_ij = exp(<x_i W_Q, x_j W_K>).
Matrix attention_weights(const Matrix& x, const AttnParams& p);

/// D^{-1} A X W_V (W_O). Unmasked; rows are tokens.
Matrix attention(const Matrix& x, const AttnParams& p);

/// Applies the FFN to every row of an n x d matrix.
Matrix ffn(const Matrix& x, const FfnParams& p);

/// Y_j = X_j W + b for every row j.
Matrix mlp(const Matrix& x, const Matrix& w, std::span<const double> b);

/// Row-wise (x - mean) / sqrt(var + eps) with population variance.
/// With eps == 0 a constant row throws DomainError; with eps > 0 it maps to zeros.
Matrix layer_norm(const Matrix& x, double eps = 1e-6);

TokenMap conv3x3(const TokenMap& t, const ConvParams& p);

}  // namespace varapprox

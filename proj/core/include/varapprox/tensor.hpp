#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace varapprox {

/// Spatial extent (height, width) of a token map.
struct Shape2 {
  std::size_t h = 1;
  std::size_t w = 1;

  std::size_t area() const noexcept { return h * w; }
  friend bool operator==(const Shape2&, const Shape2&) = default;
};

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> diag);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  Matrix transpose() const;
  /// Rows [first, first + count).
  Matrix row_block(std::size_t first, std::size_t count) const;
  /// Columns [first, first + count).
  Matrix col_block(std::size_t first, std::size_t count) const;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Matrix a, double s);
Matrix operator*(double s, Matrix a);
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);
/// Stacks matrices with equal column counts top to bottom.
Matrix vstack(std::span<const Matrix> parts);
/// Adds `bias` to every row.
Matrix add_row_bias(Matrix m, std::span<const double> bias);
bool all_finite(const Matrix& m);

enum class VectorNorm { kL1, kL2, kInf };

/// l1, l2 or l-infinity norm. Throws DomainError on an empty vector.
double vector_norm(std::span<const double> x, VectorNorm p);

double frobenius_norm(const Matrix& a);

struct SpectralOptions {
  double tol = 1e-12;
  std::size_t max_iter = 20000;
};

/// Largest singular value via power iteration on A^T A.
///
/// The primary start vector is the normalized all-ones vector. A second run
/// from a fixed-seed Gaussian start guards against a start that is orthogonal
/// to the dominant eigenvector; the larger estimate is returned. Throws
/// ConvergenceError when the relative change of the Rayleigh quotient does not
/// drop below `tol` within `max_iter` iterations.
double spectral_norm(const Matrix& a, const SpectralOptions& opts = {});

/// An h x w x d feature map stored row-major (h, then w, then d).
/// Entry (i, j, l) lives at data[(i * w + j) * d + l]; the matrix view has
/// row k = i * w + j. One-based (i, j, l) indices map to (i-1, j-1, l-1).
class TokenMap {
 public:
  TokenMap() = default;
  TokenMap(std::size_t h, std::size_t w, std::size_t d, double fill = 0.0);
  TokenMap(std::size_t h, std::size_t w, std::size_t d, std::vector<double> data);

  std::size_t h() const noexcept { return h_; }
  std::size_t w() const noexcept { return w_; }
  std::size_t d() const noexcept { return d_; }
  Shape2 shape() const noexcept { return {h_, w_}; }
  std::size_t tokens() const noexcept { return h_ * w_; }

  double& operator()(std::size_t i, std::size_t j, std::size_t l) {
    return data_[(i * w_ + j) * d_ + l];
  }
  double operator()(std::size_t i, std::size_t j, std::size_t l) const {
    return data_[(i * w_ + j) * d_ + l];
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  TokenMap& operator+=(const TokenMap& other);
  TokenMap& operator-=(const TokenMap& other);
  TokenMap& operator*=(double s);

  friend bool operator==(const TokenMap&, const TokenMap&) = default;

 private:
  std::size_t h_ = 0;
  std::size_t w_ = 0;
  std::size_t d_ = 0;
  std::vector<double> data_;
};

TokenMap operator+(TokenMap a, const TokenMap& b);
TokenMap operator-(TokenMap a, const TokenMap& b);
TokenMap operator*(double s, TokenMap a);

/// Reshape an (h*w) x d matrix into an h x w x d map. Throws ShapeError if rows != h*w.
TokenMap tensorize(const Matrix& m, std::size_t h, std::size_t w);
Matrix matricize(const TokenMap& t);

}  // namespace varapprox

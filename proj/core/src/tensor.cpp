#include "varapprox/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "varapprox/error.hpp"

namespace varapprox {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    std::ostringstream os;
    os << op << ": shape mismatch " << a.rows() << "x" << a.cols() << " vs " << b.rows() << "x"
       << b.cols();
    throw ShapeError(os.str());
  }
}

void require_same_shape(const TokenMap& a, const TokenMap& b, const char* op) {
  if (a.h() != b.h() || a.w() != b.w() || a.d() != b.d()) {
    std::ostringstream os;
    os << op << ": token map shape mismatch " << a.h() << "x" << a.w() << "x" << a.d() << " vs "
       << b.h() << "x" << b.w() << "x" << b.d();
    throw ShapeError(os.str());
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

struct PowerResult {
  double sigma_sq;
  bool converged;
  double residual;
  std::vector<double> v;
};

// Power iteration on A^T A from unit start vector v.
PowerResult power_iterate(const Matrix& a, std::vector<double> v, const SpectralOptions& opts) {
  const std::size_t n = a.cols();
  const std::size_t m = a.rows();
  std::vector<double> av(m);
  std::vector<double> atav(n);
  double lambda = 0.0;
  double residual = 0.0;

  auto apply = [&](const std::vector<double>& x) {
    for (std::size_t i = 0; i < m; ++i) av[i] = dot(a.row(i), x);
    std::fill(atav.begin(), atav.end(), 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const auto r = a.row(i);
      for (std::size_t j = 0; j < n; ++j) atav[j] += r[j] * av[i];
    }
  };

  for (std::size_t it = 0; it < opts.max_iter; ++it) {
    apply(v);
    const double next = dot(av, av);  // Rayleigh quotient v^T A^T A v for unit v
    const double norm = std::sqrt(dot(atav, atav));
    residual = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double r = atav[j] - next * v[j];
      residual += r * r;
    }
    residual = std::sqrt(residual);
    if (norm == 0.0) return {0.0, true, 0.0, v};
    const bool settled = it > 0 && std::abs(next - lambda) <= opts.tol * next;
    lambda = next;
    if (settled || residual <= opts.tol * next) return {lambda, true, residual, v};
    for (std::size_t j = 0; j < n; ++j) v[j] = atav[j] / norm;
  }
  return {lambda, false, residual, v};
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw ShapeError("Matrix: data length does not equal rows*cols");
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ShapeError("Matrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
  Matrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Matrix Matrix::row_block(std::size_t first, std::size_t count) const {
  if (first + count > rows_) throw ShapeError("Matrix::row_block: range exceeds row count");
  return Matrix(count, cols_,
                std::vector<double>(data_.begin() + static_cast<std::ptrdiff_t>(first * cols_),
                                    data_.begin() +
                                        static_cast<std::ptrdiff_t>((first + count) * cols_)));
}

Matrix Matrix::col_block(std::size_t first, std::size_t count) const {
  if (first + count > cols_) throw ShapeError("Matrix::col_block: range exceeds column count");
  Matrix out(rows_, count);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < count; ++j) out(i, j) = (*this)(i, first + j);
  return out;
}

Matrix& Matrix::operator+=(const Matrix& other) {
  require_same_shape(*this, other, "operator+");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  require_same_shape(*this, other, "operator-");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& x : data_) x *= s;
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(Matrix a, double s) { return a *= s; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    std::ostringstream os;
    os << "matmul: inner dimensions differ (" << a.rows() << "x" << a.cols() << " * " << b.rows()
       << "x" << b.cols() << ")";
    throw ShapeError(os.str());
  }
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "hadamard");
  Matrix c = a;
  auto cd = c.data();
  const auto bd = b.data();
  for (std::size_t k = 0; k < cd.size(); ++k) cd[k] *= bd[k];
  return c;
}

Matrix vstack(std::span<const Matrix> parts) {
  if (parts.empty()) throw ShapeError("vstack: no parts");
  const std::size_t cols = parts.front().cols();
  std::size_t rows = 0;
  for (const auto& p : parts) {
    if (p.cols() != cols) throw ShapeError("vstack: column counts differ");
    rows += p.rows();
  }
  std::vector<double> data;
  data.reserve(rows * cols);
  for (const auto& p : parts) data.insert(data.end(), p.values().begin(), p.values().end());
  return Matrix(rows, cols, std::move(data));
}

Matrix add_row_bias(Matrix m, std::span<const double> bias) {
  if (bias.size() != m.cols()) throw ShapeError("add_row_bias: bias length != column count");
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += bias[j];
  }
  return m;
}

bool all_finite(const Matrix& m) {
  return std::all_of(m.values().begin(), m.values().end(),
                     [](double x) { return std::isfinite(x); });
}

double vector_norm(std::span<const double> x, VectorNorm p) {
  if (x.empty()) throw DomainError("vector_norm: empty vector");
  switch (p) {
    case VectorNorm::kL1: {
      double s = 0.0;
      for (double v : x) s += std::abs(v);
      return s;
    }
    case VectorNorm::kL2:
      return std::sqrt(dot(x, x));
    case VectorNorm::kInf: {
      double s = 0.0;
      for (double v : x) s = std::max(s, std::abs(v));
      return s;
    }
  }
  return 0.0;
}

double frobenius_norm(const Matrix& a) { return std::sqrt(dot(a.data(), a.data())); }

double spectral_norm(const Matrix& a, const SpectralOptions& opts) {
  if (opts.tol <= 0.0) throw DomainError("spectral_norm: tol must be positive");
  if (a.empty() || frobenius_norm(a) == 0.0) return 0.0;

  const std::size_t n = a.cols();
  std::vector<double> ones(n, 1.0 / std::sqrt(static_cast<double>(n)));
  const PowerResult primary = power_iterate(a, std::move(ones), opts);
  if (!primary.converged) {
    throw ConvergenceError("spectral_norm: power iteration did not converge",
                           std::sqrt(primary.sigma_sq), primary.residual, primary.v);
  }

  std::mt19937_64 gen(0x5eed5eedULL);
  std::normal_distribution<double> normal;
  std::vector<double> start(n);
  double norm = 0.0;
  for (double& s : start) {
    s = normal(gen);
    norm += s * s;
  }
  norm = std::sqrt(norm);
  for (double& s : start) s /= norm;
  const PowerResult backup = power_iterate(a, std::move(start), opts);
  if (!backup.converged) {
    throw ConvergenceError("spectral_norm: power iteration did not converge",
                           std::sqrt(backup.sigma_sq), backup.residual, backup.v);
  }
  return std::sqrt(std::max(primary.sigma_sq, backup.sigma_sq));
}

TokenMap::TokenMap(std::size_t h, std::size_t w, std::size_t d, double fill)
    : h_(h), w_(w), d_(d), data_(h * w * d, fill) {
  if (h == 0 || w == 0 || d == 0) throw ShapeError("TokenMap: dimensions must be positive");
}

TokenMap::TokenMap(std::size_t h, std::size_t w, std::size_t d, std::vector<double> data)
    : h_(h), w_(w), d_(d), data_(std::move(data)) {
  if (h == 0 || w == 0 || d == 0) throw ShapeError("TokenMap: dimensions must be positive");
  if (data_.size() != h * w * d) throw ShapeError("TokenMap: data length does not equal h*w*d");
}

TokenMap& TokenMap::operator+=(const TokenMap& other) {
  require_same_shape(*this, other, "TokenMap::operator+");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
  return *this;
}

TokenMap& TokenMap::operator-=(const TokenMap& other) {
  require_same_shape(*this, other, "TokenMap::operator-");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
  return *this;
}

TokenMap& TokenMap::operator*=(double s) {
  for (double& x : data_) x *= s;
  return *this;
}

TokenMap operator+(TokenMap a, const TokenMap& b) { return a += b; }
TokenMap operator-(TokenMap a, const TokenMap& b) { return a -= b; }
TokenMap operator*(double s, TokenMap a) { return a *= s; }

TokenMap tensorize(const Matrix& m, std::size_t h, std::size_t w) {
  if (h == 0 || w == 0 || m.rows() != h * w) {
    std::ostringstream os;
    os << "tensorize: " << m.rows() << " rows cannot be viewed as " << h << "x" << w;
    throw ShapeError(os.str());
  }
  return TokenMap(h, w, m.cols(), m.values());
}

Matrix matricize(const TokenMap& t) { return Matrix(t.tokens(), t.d(), t.values()); }

}  // namespace varapprox

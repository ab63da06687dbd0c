#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "varapprox/error.hpp"
#include "varapprox/rng.hpp"
#include "varapprox/tensor.hpp"

using namespace varapprox;

TEST(Matrix, MatmulMatchesTripleLoop) {
  Rng rng(11, "matmul");
  for (int k = 0; k < 20; ++k) {
    const std::size_t n = rng.uniform_int(1, 6), m = rng.uniform_int(1, 6), p = rng.uniform_int(1, 6);
    const Matrix a = rng.gaussian_matrix(n, m), b = rng.gaussian_matrix(m, p);
    EXPECT_LE(oracle::max_abs_diff(matmul(a, b), oracle::product(a, b)), 1e-12);
  }
}

TEST(Matrix, MatmulShapeMismatchThrows) {
  EXPECT_THROW(matmul(Matrix(2, 3), Matrix(2, 3)), ShapeError);
}

TEST(Matrix, TransposeAndBlocks) {
  const Matrix a{{1, 2, 3}, {4, 5, 6}};
  EXPECT_EQ(a.transpose(), (Matrix{{1, 4}, {2, 5}, {3, 6}}));
  EXPECT_EQ(a.row_block(1, 1), (Matrix{{4, 5, 6}}));
  EXPECT_EQ(a.col_block(1, 2), (Matrix{{2, 3}, {5, 6}}));
}

TEST(Matrix, VstackAndBias) {
  const std::vector<Matrix> parts{Matrix{{1, 2}}, Matrix{{3, 4}, {5, 6}}};
  EXPECT_EQ(vstack(parts), (Matrix{{1, 2}, {3, 4}, {5, 6}}));
  const std::vector<double> b{10, 20};
  EXPECT_EQ(add_row_bias(Matrix{{1, 2}, {3, 4}}, b), (Matrix{{11, 22}, {13, 24}}));
}

TEST(Matrix, HadamardAndScaling) {
  const Matrix a{{1, 2}, {3, 4}};
  EXPECT_EQ(hadamard(a, a), (Matrix{{1, 4}, {9, 16}}));
  EXPECT_EQ(2.0 * a, (Matrix{{2, 4}, {6, 8}}));
  EXPECT_EQ(a - a, Matrix(2, 2));
}

TEST(Norms, VectorNorms) {
  const std::vector<double> x{3, -4};
  EXPECT_DOUBLE_EQ(vector_norm(x, VectorNorm::kL1), 7.0);
  EXPECT_DOUBLE_EQ(vector_norm(x, VectorNorm::kL2), 5.0);
  EXPECT_DOUBLE_EQ(vector_norm(x, VectorNorm::kInf), 4.0);
  EXPECT_THROW(vector_norm(std::vector<double>{}, VectorNorm::kL2), DomainError);
}

TEST(Norms, Frobenius) { EXPECT_DOUBLE_EQ(frobenius_norm(Matrix{{1, 2}, {2, 4}}), 5.0); }

TEST(Norms, SpectralExamples) {
  EXPECT_NEAR(spectral_norm(Matrix{{3, 0}, {0, 4}}), 4.0, 1e-9);
  EXPECT_NEAR(spectral_norm(Matrix{{1, 1}, {1, 1}}), 2.0, 1e-9);
  EXPECT_EQ(spectral_norm(Matrix(3, 3)), 0.0);
}

TEST(Norms, SpectralOrthogonalStart) {
  // The all-ones start is orthogonal to the dominant direction (1, -1).
  EXPECT_NEAR(spectral_norm(Matrix{{2, -2}, {-2, 2}}), 4.0, 1e-9);
}

TEST(Norms, SpectralAgreesWithGramBound) {
  // ||A||_2^2 <= ||A^T A||_F and ||A||_2 >= ||A x|| / ||x|| for every x.
  Rng rng(3, "spectral");
  for (int k = 0; k < 10; ++k) {
    const Matrix a = rng.gaussian_matrix(rng.uniform_int(1, 5), rng.uniform_int(1, 5));
    const double s = spectral_norm(a);
    EXPECT_LE(s * s, frobenius_norm(oracle::product(a.transpose(), a)) * (1 + 1e-9));
    for (int t = 0; t < 20; ++t) {
      const Matrix x = rng.gaussian_matrix(a.cols(), 1);
      EXPECT_LE(frobenius_norm(oracle::product(a, x)), s * frobenius_norm(x) * (1 + 1e-9));
    }
  }
}

TEST(TokenMap, LayoutAndReshape) {
  TokenMap t(2, 3, 2);
  for (std::size_t k = 0; k < t.data().size(); ++k) t.data()[k] = static_cast<double>(k);
  EXPECT_EQ(t(1, 2, 1), 11.0);
  const Matrix m = matricize(t);
  EXPECT_EQ(m.rows(), 6u);
  EXPECT_EQ(m(1 * 3 + 2, 1), 11.0);
  EXPECT_EQ(tensorize(m, 2, 3), t);
  EXPECT_THROW(tensorize(m, 2, 2), ShapeError);
}

TEST(Rng, SubstreamsAreStable) {
  Rng a(7, "x"), b(7, "x"), c(7, "y");
  EXPECT_EQ(a.normal(), b.normal());
  EXPECT_NE(Rng(7, "x").normal(), c.normal());
  const Rng root(7);
  EXPECT_EQ(root.substream("s").seed(), root.substream("s").seed());
  EXPECT_NE(root.substream("s").seed(), root.substream("t").seed());
}

TEST(Rng, UniformIntInRange) {
  Rng r(1, "int");
  for (int k = 0; k < 1000; ++k) {
    const auto v = r.uniform_int(2, 5);
    EXPECT_GE(v, 2u);
    EXPECT_LE(v, 5u);
  }
}

#include <gtest/gtest.h>

#include <random>

#include "test_util.hpp"
#include "unhippo/matfun.hpp"

namespace unhippo {
namespace {

using testing::random_matrix;
using testing::random_rank;

// Truncated Taylor series, independent of the Pade path.
Matrix expm_series(const Matrix& a, int terms) {
  Matrix sum = Matrix::Identity(a.rows(), a.cols());
  Matrix term = sum;
  for (int j = 1; j <= terms; ++j) {
    term = term * a / static_cast<double>(j);
    sum += term;
  }
  return sum;
}

TEST(Expm, ZeroIsIdentity) {
  EXPECT_EQ(expm(Matrix::Zero(3, 3)), Matrix::Identity(3, 3));
}

TEST(Expm, Diagonal) {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = 1.0;
  a(1, 1) = 2.0;
  const Matrix e = expm(a);
  EXPECT_NEAR(e(0, 0), std::exp(1.0), 1e-14);
  EXPECT_NEAR(e(1, 1), std::exp(2.0), 1e-13);
  EXPECT_EQ(e(0, 1), 0.0);
  EXPECT_EQ(e(1, 0), 0.0);
}

TEST(Expm, MatchesPowerSeries) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = random_matrix(rng, 4, 4);
    EXPECT_LT(max_abs(expm(a) - expm_series(a, 30)), 1e-10);
  }
}

TEST(Expm, InverseAndSemigroup) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index n = 2 + trial % 15;
    Matrix a = random_matrix(rng, n, n);
    a *= 5.0 / a.norm();  // Frobenius norm bounds the operator 2-norm
    EXPECT_LT(max_abs(expm(a) * expm(-a) - Matrix::Identity(n, n)), 1e-8);
    const double s = 0.3, t = 0.45;
    EXPECT_LT(max_abs(expm(s * a) * expm(t * a) - expm((s + t) * a)), 1e-8);
  }
}

TEST(Expm, RejectsNonSquare) {
  EXPECT_THROW(expm(Matrix::Zero(2, 3)), DimensionError);
}

TEST(Expm, ReportsOverflow) {
  const Matrix a = 1e4 * Matrix::Identity(2, 2);
  try {
    expm(a);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("norm"), std::string::npos);
  }
}

void expect_moore_penrose(const Matrix& a, const Matrix& ap, double tol) {
  EXPECT_LT(max_abs(a * ap * a - a), tol);
  EXPECT_LT(max_abs(ap * a * ap - ap), tol);
  const Matrix aap = a * ap;
  const Matrix apa = ap * a;
  EXPECT_LT(max_abs(aap - aap.transpose()), tol);
  EXPECT_LT(max_abs(apa - apa.transpose()), tol);
}

TEST(Pinv, Identity) {
  EXPECT_LT(max_abs(pinv(Matrix::Identity(5, 5)) - Matrix::Identity(5, 5)), 1e-15);
}

TEST(Pinv, LeftInverseForFullColumnRank) {
  std::mt19937_64 rng(3);
  const Matrix a = random_matrix(rng, 7, 3);
  EXPECT_LT(max_abs(pinv(a) * a - Matrix::Identity(3, 3)), 1e-10);
}

TEST(Pinv, RankDeficientSatisfiesMoorePenrose) {
  std::mt19937_64 rng(5);
  const Matrix a = random_rank(rng, 6, 4, 3);
  expect_moore_penrose(a, pinv(a), 1e-9);
}

TEST(Pinv, RandomShapesAndRanks) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> dim(1, 32);
  for (int trial = 0; trial < 40; ++trial) {
    const int rows = dim(rng);
    const int cols = dim(rng);
    std::uniform_int_distribution<int> rank_dist(1, std::min(rows, cols));
    const Matrix a = random_rank(rng, rows, cols, rank_dist(rng));
    expect_moore_penrose(a, pinv(a), 1e-9);
  }
}

TEST(Pinv, RejectsNegativeTolerance) {
  EXPECT_THROW(pinv(Matrix::Identity(2, 2), -1.0), InputError);
}

TEST(Symmetrize, FixedPointOnSymmetric) {
  std::mt19937_64 rng(2);
  const Matrix g = random_matrix(rng, 5, 5);
  const Matrix p = g + g.transpose();
  EXPECT_EQ(symmetrize(p), p);
}

TEST(Symmetrize, Averages) {
  Matrix p(2, 2);
  p << 0, 2, 0, 0;
  Matrix expected(2, 2);
  expected << 0, 1, 1, 0;
  EXPECT_EQ(symmetrize(p), expected);
}

TEST(Symmetrize, ExactlySymmetric) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix s = symmetrize(random_matrix(rng, 8, 8, -1e3, 1e3));
    EXPECT_EQ(max_abs(s - s.transpose()), 0.0);
  }
}

TEST(Symmetrize, RejectsNonSquare) {
  EXPECT_THROW(symmetrize(Matrix::Zero(2, 3)), DimensionError);
}

TEST(Solve, RejectsSingular) {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = 1.0;
  EXPECT_THROW(solve(a, Matrix::Identity(2, 2)), NumericError);
}

}  // namespace
}  // namespace unhippo

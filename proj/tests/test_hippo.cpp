#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "test_util.hpp"
#include "unhippo/hippo.hpp"
#include "unhippo/legendre.hpp"
#include "unhippo/signals.hpp"

namespace unhippo {
namespace {

const double kSqrt3 = std::sqrt(3.0);

TEST(MakeHippo, TwoByTwo) {
  const HippoSystem sys = make_hippo(2);
  Matrix a(2, 2);
  a << 1, 0, kSqrt3, 2;
  EXPECT_LT(max_abs(sys.a - a), 1e-15);
  EXPECT_EQ(sys.b(0), 1.0);
  EXPECT_EQ(sys.b(1), kSqrt3);
}

TEST(MakeHippo, Scalar) {
  const HippoSystem sys = make_hippo(1);
  EXPECT_EQ(sys.a(0, 0), 1.0);
  EXPECT_EQ(sys.b(0), 1.0);
}

TEST(MakeHippo, RejectsZero) { EXPECT_THROW(make_hippo(0), InputError); }

TEST(MakeHippo, StructureAndIdentity) {
  for (std::size_t n : {2u, 8u, 64u, 257u, 512u}) {
    const HippoSystem sys = make_hippo(n);
    const auto size = static_cast<Eigen::Index>(n);
    EXPECT_TRUE(sys.a.isLowerTriangular(0.0));
    for (Eigen::Index i = 0; i < size; ++i) {
      EXPECT_EQ(sys.a(i, i), static_cast<double>(i + 1));
      EXPECT_GT(sys.b(i), 0.0);
    }
    const Matrix lhs = sys.b * sys.b.transpose() - sys.a;
    const Matrix rhs = sys.a.transpose() - Matrix::Identity(size, size);
    EXPECT_LT(max_abs(lhs - rhs), n <= 8 ? 1e-12 : 1e-10) << "n = " << n;
  }
}

TEST(HippoRhs, Basics) {
  const HippoSystem sys = make_hippo(5);
  EXPECT_EQ(hippo_rhs(sys, 2.0, Vector::Zero(5), 0.0), Vector::Zero(5));
  EXPECT_EQ(hippo_rhs(sys, 1.0, Vector::Zero(5), 1.0), sys.b);
  EXPECT_THROW(hippo_rhs(sys, 0.0, Vector::Zero(5), 1.0), DomainError);
  EXPECT_THROW(hippo_rhs(sys, 1.0, Vector::Zero(4), 1.0), DimensionError);
}

// RK4 on the continuous dynamics from t = eps (seeded with the exact
// coefficients of f(tau) = tau on [0, eps]) to t = 1, compared with the
// quadrature projection of the same signal.
TEST(HippoRhs, Rk4MatchesProjection) {
  const std::size_t n = 6;
  const HippoSystem sys = make_hippo(n);
  const double eps = 1e-3;
  Vector c = Vector::Zero(static_cast<Eigen::Index>(n));
  c(0) = eps / 2.0;
  c(1) = kSqrt3 * eps / 6.0;
  double t = eps;
  while (t < 1.0) {
    const double h = std::min(0.005 * t, 1.0 - t);
    const auto f = [](double tau) { return tau; };
    const Vector k1 = hippo_rhs(sys, t, c, f(t));
    const Vector k2 = hippo_rhs(sys, t + h / 2, c + h / 2 * k1, f(t + h / 2));
    const Vector k3 = hippo_rhs(sys, t + h / 2, c + h / 2 * k2, f(t + h / 2));
    const Vector k4 = hippo_rhs(sys, t + h, c + h * k3, f(t + h));
    c += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    t += h;
  }
  std::vector<Sample> samples;
  for (double tau : equispaced(10001, 0.0, 1.0)) samples.push_back({tau, tau});
  const CoefVector expected = project(Basis(n, 1.0), samples);
  EXPECT_LT(max_abs(c - expected.c), 1e-4);
}

TEST(DiscretizeHippo, ForwardTwoByTwo) {
  const DiscretePair d = discretize_hippo(make_hippo(2), Scheme::forward, 1.0, 1.0);
  Matrix expected(2, 2);
  expected << 0, 0, -kSqrt3, -1;
  EXPECT_LT(max_abs(d.a_bar - expected), 1e-15);
  EXPECT_EQ(d.b_bar, Vector::Zero(2));
  EXPECT_LT(max_abs(d.b_bar_prev - make_hippo(2).b), 1e-15);
}

TEST(DiscretizeHippo, TrapezoidalLsslTwoByTwo) {
  // (I + A/2)^{-1} (I - A/2) and (I + A/2)^{-1} B at t_{k+1} = 1, dt = 1,
  // worked out by hand for A = [[1, 0], [sqrt3, 2]].
  const DiscretePair d =
      discretize_hippo_ending_at(make_hippo(2), Scheme::trapezoidal_lssl, 1.0, 1.0);
  Matrix a(2, 2);
  a << 1.0 / 3.0, 0.0, -kSqrt3 / 3.0, 0.0;
  EXPECT_LT(max_abs(d.a_bar - a), 1e-15);
  EXPECT_NEAR(d.b_bar(0), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(d.b_bar(1), kSqrt3 / 3.0, 1e-15);
}

TEST(DiscretizeHippo, ZeroStepLimit) {
  const HippoSystem sys = make_hippo(8);
  for (Scheme s : {Scheme::forward, Scheme::backward, Scheme::trapezoidal,
                   Scheme::trapezoidal_lssl}) {
    const DiscretePair d = discretize_hippo(sys, s, 2.0, 1e-8);
    EXPECT_LT(max_abs(d.a_bar - Matrix::Identity(8, 8)), 1e-6) << to_string(s);
    EXPECT_LT(max_abs(d.input_weight()), 1e-6) << to_string(s);
  }
}

TEST(DiscretizeHippo, BackwardIsInverse) {
  const HippoSystem sys = make_hippo(16);
  const double t_k = 3.0, dt = 0.7;
  const DiscretePair d = discretize_hippo(sys, Scheme::backward, t_k, dt);
  const Matrix lhs = Matrix::Identity(16, 16) + dt / (t_k + dt) * sys.a;
  EXPECT_LT(max_abs(lhs * d.a_bar - Matrix::Identity(16, 16)), 1e-10);
}

TEST(DiscretizeHippo, ClosedFormRejected) {
  EXPECT_THROW(discretize_hippo(make_hippo(3), Scheme::closed_form, 1.0, 1.0),
               InputError);
}

TEST(DiscretizeHippo, RejectsNonPositiveTimes) {
  const HippoSystem sys = make_hippo(3);
  EXPECT_THROW(discretize_hippo(sys, Scheme::forward, 0.0, 1.0), DomainError);
  EXPECT_THROW(discretize_hippo(sys, Scheme::forward, 1.0, 0.0), DomainError);
}

TEST(DiscretizeHippo, SchemesAgreeToFirstOrder) {
  const HippoSystem sys = make_hippo(6);
  const double t_k = 5.0;
  std::vector<double> spread;
  for (double dt : {1e-2, 1e-3, 1e-4}) {
    const DiscretePair ref = discretize_hippo(sys, Scheme::trapezoidal, t_k, dt);
    double worst = 0.0;
    for (Scheme s : {Scheme::forward, Scheme::backward, Scheme::trapezoidal_lssl}) {
      const DiscretePair d = discretize_hippo(sys, s, t_k, dt);
      worst = std::max(worst, max_abs(d.a_bar - ref.a_bar));
      worst = std::max(worst, max_abs(d.input_weight() - ref.input_weight()));
    }
    spread.push_back(worst);
  }
  EXPECT_LT(spread[0], 1e-2);
  EXPECT_LT(spread[1], spread[0] / 5.0);
  EXPECT_LT(spread[2], spread[1] / 5.0);
}

TEST(DiscretizeHippo, EndingAtFallsBackToIdentityWithoutEarlierSample) {
  const HippoSystem sys = make_hippo(4);
  const DiscretePair d = discretize_hippo_ending_at(sys, Scheme::forward, 1.0, 1.0);
  EXPECT_EQ(d.a_bar, Matrix::Identity(4, 4));
  EXPECT_EQ(d.input_weight(), Vector::Zero(4));
  const DiscretePair later = discretize_hippo_ending_at(sys, Scheme::forward, 3.0, 1.0);
  const DiscretePair direct = discretize_hippo(sys, Scheme::forward, 2.0, 1.0);
  EXPECT_EQ(later.a_bar, direct.a_bar);
}

// Degree-(n-1) polynomial run through the full two-input trapezoidal
// recurrence on a dense grid; the continuous dynamics are exact, so only
// discretization error remains.
TEST(HippoRecurrence, PolynomialExactness) {
  const std::size_t n = 8;
  const HippoSystem sys = make_hippo(n);
  const auto poly = [](double x) {
    return 1.0 - 2.0 * x + 3.0 * x * x - x * x * x + 0.5 * std::pow(x, 4) -
           0.7 * std::pow(x, 5) + 0.2 * std::pow(x, 6) - 0.4 * std::pow(x, 7);
  };
  const std::size_t steps = 10000;
  const double dt = 1.0 / static_cast<double>(steps);
  Vector c = Vector::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t k = 1; k < steps; ++k) {
    const double t_k = dt * static_cast<double>(k);
    const DiscretePair d = discretize_hippo(sys, Scheme::trapezoidal, t_k, dt);
    c = d.step(c, poly(t_k), poly(t_k + dt));
  }
  std::vector<Sample> samples;
  for (double tau : equispaced(20001, 0.0, 1.0)) samples.push_back({tau, poly(tau)});
  const CoefVector expected = project(Basis(n, 1.0), samples);
  EXPECT_LT(max_abs(c - expected.c), 1e-3);
}

}  // namespace
}  // namespace unhippo

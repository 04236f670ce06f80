#pragma once

// Data-free latent dynamics for the coefficient vector and their
// regularization: the drift (1/t) A_R c keeps the reconstruction's endpoint
// slope roughly constant when the horizon is extended, instead of letting
// the polynomial diverge.

#include <cmath>
#include <cstddef>

#include "unhippo/errors.hpp"
#include "unhippo/hippo.hpp"
#include "unhippo/matfun.hpp"

namespace unhippo {

/// A_H^T - I, the exact drift of c_t when the signal equals its own
/// reconstruction (B B^T - A_H simplified).
inline Matrix data_free_matrix(const HippoSystem& sys) {
  const auto size = static_cast<Eigen::Index>(sys.n);
  return sys.a.transpose() - Matrix::Identity(size, size);
}

/// Q_i = sqrt(2i+1) * P_i'(1) = sqrt(2i+1) * i(i+1)/2.
inline Vector make_q(std::size_t n) {
  if (n == 0) throw InputError("make_q: n must be >= 1");
  Vector q(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    const double di = static_cast<double>(i);
    q(i) = std::sqrt(2.0 * di + 1.0) * di * (di + 1.0) / 2.0;
  }
  return q;
}

struct RegularizedSystem {
  std::size_t n = 0;
  Matrix a_r;  // regularized HiPPO matrix
  Vector q;
  Vector b;    // B_H
  /// ||B^T A_R - 2 Q^T||_2: bounds the endpoint-slope violation per unit ||c||.
  double slope_residual = 0.0;
  /// ||Q^T A_R - Q^T||_2: same for the constant-slope condition.
  double curvature_residual = 0.0;
};

/// Stacked (n+2) x n least-squares system whose solution is A_R.
struct RegularizationSystem {
  Matrix stack;  // [I; B^T; Q^T]
  Matrix rhs;    // [A^T - I; 2 Q^T; Q^T]
};

inline RegularizationSystem regularization_system(const HippoSystem& sys) {
  const auto size = static_cast<Eigen::Index>(sys.n);
  const Vector q = make_q(sys.n);
  RegularizationSystem out{Matrix(size + 2, size), Matrix(size + 2, size)};
  out.stack.topRows(size) = Matrix::Identity(size, size);
  out.stack.row(size) = sys.b.transpose();
  out.stack.row(size + 1) = q.transpose();
  out.rhs.topRows(size) = data_free_matrix(sys);
  out.rhs.row(size) = 2.0 * q.transpose();
  out.rhs.row(size + 1) = q.transpose();
  return out;
}

inline RegularizedSystem make_regularized(const HippoSystem& sys,
                                          double rel_tol = 1e-12) {
  const RegularizationSystem ls = regularization_system(sys);
  RegularizedSystem out;
  out.n = sys.n;
  out.q = make_q(sys.n);
  out.b = sys.b;
  out.a_r = pinv(ls.stack, rel_tol) * ls.rhs;
  if (!out.a_r.allFinite()) {
    throw NumericError("make_regularized: non-finite regularized matrix");
  }
  out.slope_residual =
      (out.b.transpose() * out.a_r - 2.0 * out.q.transpose()).norm();
  out.curvature_residual =
      (out.q.transpose() * out.a_r - out.q.transpose()).norm();
  return out;
}

/// Transition matrix of dc/dt = (1/t) M c from t_from to t_to.
/// closed_form is exp(ln(t_to / t_from) M); the other schemes are the usual
/// one-step rules with dt = t_to - t_from.
inline Matrix transition(const Matrix& dynamics, double t_from, double t_to,
                         Scheme scheme) {
  require_square(dynamics, "transition");
  if (!(t_from > 0.0) || !std::isfinite(t_from)) {
    throw DomainError("transition: t_from must be positive");
  }
  if (!(t_to >= t_from) || !std::isfinite(t_to)) {
    throw DomainError("transition: t_to must be >= t_from");
  }
  const Eigen::Index size = dynamics.rows();
  const Matrix eye = Matrix::Identity(size, size);
  const double dt = t_to - t_from;
  if (dt == 0.0 && scheme != Scheme::trapezoidal_lssl) return eye;
  switch (scheme) {
    case Scheme::closed_form:
      return expm(std::log(t_to / t_from) * dynamics);
    case Scheme::forward:
      return eye + (dt / t_from) * dynamics;
    case Scheme::backward:
      return solve(eye - (dt / t_to) * dynamics, eye, "transition(backward)");
    case Scheme::trapezoidal:
      return solve(eye - (dt / (2.0 * t_to)) * dynamics,
                   eye + (dt / (2.0 * t_from)) * dynamics,
                   "transition(trapezoidal)");
    case Scheme::trapezoidal_lssl:
      break;
  }
  throw InputError(
      "transition: trapezoidal_lssl is defined only for the data-driven HiPPO "
      "recurrence");
}

inline Matrix transition(const RegularizedSystem& sys, double t_from,
                         double t_to, Scheme scheme) {
  return transition(sys.a_r, t_from, t_to, scheme);
}

}  // namespace unhippo

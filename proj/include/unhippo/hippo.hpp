#pragma once

// The HiPPO-LegS matrix/vector pair, its continuous dynamics
//   dc/dt = -(1/t) A c + (1/t) B f(t)
// and the one-step discretizations used to run them on sampled data.

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "unhippo/errors.hpp"
#include "unhippo/matfun.hpp"

namespace unhippo {

enum class Scheme { forward, backward, trapezoidal, trapezoidal_lssl, closed_form };

inline std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::forward: return "forward";
    case Scheme::backward: return "backward";
    case Scheme::trapezoidal: return "trapezoidal";
    case Scheme::trapezoidal_lssl: return "trapezoidal_lssl";
    case Scheme::closed_form: return "closed_form";
  }
  return "unknown";
}

inline std::optional<Scheme> parse_scheme(std::string_view name) {
  for (Scheme s : {Scheme::forward, Scheme::backward, Scheme::trapezoidal,
                   Scheme::trapezoidal_lssl, Scheme::closed_form}) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

struct HippoSystem {
  std::size_t n = 0;
  Matrix a;  // lower triangular, a_ii = i + 1
  Vector b;  // b_i = sqrt(2i + 1)
};

inline HippoSystem make_hippo(std::size_t n) {
  if (n == 0) throw InputError("make_hippo: n must be >= 1");
  const auto size = static_cast<Eigen::Index>(n);
  HippoSystem sys{n, Matrix::Zero(size, size), Vector(size)};
  for (Eigen::Index i = 0; i < size; ++i) {
    sys.b(i) = std::sqrt(2.0 * static_cast<double>(i) + 1.0);
  }
  for (Eigen::Index i = 0; i < size; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) sys.a(i, j) = sys.b(i) * sys.b(j);
    sys.a(i, i) = static_cast<double>(i) + 1.0;
  }
  return sys;
}

/// Right-hand side of the continuous coefficient dynamics at time t.
inline Vector hippo_rhs(const HippoSystem& sys, double t, const Vector& c,
                        double f_t) {
  if (!(t > 0.0)) throw DomainError("hippo_rhs: t must be positive");
  if (static_cast<std::size_t>(c.size()) != sys.n) {
    throw DimensionError("hippo_rhs: state size mismatch");
  }
  return (-sys.a * c + sys.b * f_t) / t;
}

/// Predicted signal value at the horizon, b^T c, summed in index order so
/// that it matches reconstruct() at tau = t exactly.
inline double endpoint_value(const Vector& b, const Vector& c) {
  if (b.size() != c.size()) {
    throw DimensionError("endpoint_value: length mismatch");
  }
  double acc = 0.0;
  for (Eigen::Index i = 0; i < b.size(); ++i) acc += c(i) * b(i);
  return acc;
}

/// One discrete step t_k -> t_k + dt:
///   c_{k+1} = a_bar c_k + b_bar_prev f(t_k) + b_bar f(t_{k+1}).
/// b_bar_prev is zero for the single-input schemes (backward,
/// trapezoidal_lssl) and carries the f(t_k) weight for forward and the full
/// trapezoidal rule.
struct DiscretePair {
  Matrix a_bar;
  Vector b_bar;
  Vector b_bar_prev;
  Scheme scheme = Scheme::trapezoidal_lssl;
  double t_k = 0.0;
  double dt = 0.0;

  /// Single-input weight that treats f(t_k) ~ f(t_{k+1}); the form stored in
  /// initialization banks and consumed by SSM layers.
  Vector input_weight() const { return b_bar + b_bar_prev; }

  Vector step(const Vector& c, double f_prev, double f_next) const {
    return a_bar * c + b_bar_prev * f_prev + b_bar * f_next;
  }
};

namespace detail {

inline DiscretePair discretize_between(const HippoSystem& sys, Scheme scheme,
                                       double t_from, double t_to) {
  const auto size = static_cast<Eigen::Index>(sys.n);
  const Matrix eye = Matrix::Identity(size, size);
  const double dt = t_to - t_from;
  DiscretePair out;
  out.scheme = scheme;
  out.t_k = t_from;
  out.dt = dt;
  out.b_bar_prev = Vector::Zero(size);
  switch (scheme) {
    case Scheme::forward: {
      out.a_bar = eye - (dt / t_from) * sys.a;
      out.b_bar = Vector::Zero(size);
      out.b_bar_prev = (dt / t_from) * sys.b;
      break;
    }
    case Scheme::backward: {
      const Matrix lhs = eye + (dt / t_to) * sys.a;
      out.a_bar = solve(lhs, eye, "discretize_hippo(backward)");
      out.b_bar = out.a_bar * ((dt / t_to) * sys.b);
      break;
    }
    case Scheme::trapezoidal: {
      const Matrix lhs = eye + (dt / (2.0 * t_to)) * sys.a;
      Matrix rhs(size, size + 2);
      rhs.leftCols(size) = eye - (dt / (2.0 * t_from)) * sys.a;
      rhs.col(size) = (dt / (2.0 * t_to)) * sys.b;
      rhs.col(size + 1) = (dt / (2.0 * t_from)) * sys.b;
      const Matrix x = solve(lhs, rhs, "discretize_hippo(trapezoidal)");
      out.a_bar = x.leftCols(size);
      out.b_bar = x.col(size);
      out.b_bar_prev = x.col(size + 1);
      break;
    }
    case Scheme::trapezoidal_lssl: {
      const Matrix lhs = eye + (dt / (2.0 * t_to)) * sys.a;
      Matrix rhs(size, size + 1);
      rhs.leftCols(size) = eye - (dt / (2.0 * t_to)) * sys.a;
      rhs.col(size) = (dt / t_to) * sys.b;
      const Matrix x = solve(lhs, rhs, "discretize_hippo(trapezoidal_lssl)");
      out.a_bar = x.leftCols(size);
      out.b_bar = x.col(size);
      break;
    }
    case Scheme::closed_form:
      throw InputError(
          "discretize_hippo: closed_form exists only for the data-free "
          "UnHiPPO dynamics");
  }
  if (!out.a_bar.allFinite() || !out.b_bar.allFinite() ||
      !out.b_bar_prev.allFinite()) {
    throw NumericError("discretize_hippo: non-finite discretization");
  }
  return out;
}

}  // namespace detail

/// Discretizes the HiPPO dynamics over [t_k, t_k + dt].
inline DiscretePair discretize_hippo(const HippoSystem& sys, Scheme scheme,
                                     double t_k, double dt) {
  if (!(t_k > 0.0) || !std::isfinite(t_k)) {
    throw DomainError("discretize_hippo: t_k must be positive");
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw DomainError("discretize_hippo: dt must be positive");
  }
  return detail::discretize_between(sys, scheme, t_k, t_k + dt);
}

/// Step that ends at t_end, as used to initialize LSSL layers (A_k built
/// from the step arriving at t_k). When t_end - dt <= 0 there is no earlier
/// sample: backward and trapezoidal_lssl only reference t_end and are
/// evaluated directly; forward and trapezoidal fall back to t_0 := t_1,
/// i.e. the identity step.
inline DiscretePair discretize_hippo_ending_at(const HippoSystem& sys,
                                               Scheme scheme, double t_end,
                                               double dt) {
  if (!(t_end > 0.0) || !(dt > 0.0)) {
    throw DomainError("discretize_hippo_ending_at: t_end and dt must be positive");
  }
  const double t_from = t_end - dt;
  if (t_from > 0.0) return detail::discretize_between(sys, scheme, t_from, t_end);
  switch (scheme) {
    case Scheme::backward:
    case Scheme::trapezoidal_lssl:
      return detail::discretize_between(sys, scheme, t_from, t_end);
    case Scheme::forward:
    case Scheme::trapezoidal: {
      const auto size = static_cast<Eigen::Index>(sys.n);
      DiscretePair out;
      out.a_bar = Matrix::Identity(size, size);
      out.b_bar = Vector::Zero(size);
      out.b_bar_prev = Vector::Zero(size);
      out.scheme = scheme;
      out.t_k = t_end;
      out.dt = 0.0;
      return out;
    }
    case Scheme::closed_form:
      break;
  }
  return detail::discretize_between(sys, scheme, t_end, t_end);  // throws
}

}  // namespace unhippo

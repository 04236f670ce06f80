#pragma once

// Legendre polynomials and the orthonormal basis they induce on [0, t]
// under the inner product <f, g>_t = (1/t) * int_0^t f g.

#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <vector>

#include "unhippo/errors.hpp"
#include "unhippo/matfun.hpp"

namespace unhippo {

/// Highest degree with documented accuracy. Evaluation past it still runs.
inline constexpr int kMaxDegree = 512;

/// P_i(x) by Bonnet's recurrence (i+1) P_{i+1} = (2i+1) x P_i - i P_{i-1}.
/// Defined on all of R, not just [-1, 1].
inline double legendre_eval(int degree, double x) {
  if (degree < 0) throw InputError("legendre_eval: degree must be >= 0");
  if (degree == 0) return 1.0;
  double prev = 1.0;
  double cur = x;
  for (int i = 1; i < degree; ++i) {
    const double next = ((2.0 * i + 1.0) * x * cur - i * prev) / (i + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

/// dP_i/dx via dP_i = i P_{i-1} + x dP_{i-1}.
inline double legendre_derivative(int degree, double x) {
  if (degree < 0) throw InputError("legendre_derivative: degree must be >= 0");
  double p_older = 0.0;  // P_{i-2}
  double p_prev = 1.0;   // P_{i-1}
  double dp = 0.0;       // P'_{i-1}
  for (int i = 1; i <= degree; ++i) {
    dp = i * p_prev + x * dp;
    const double p_i =
        i == 1 ? x : ((2.0 * i - 1.0) * x * p_prev - (i - 1.0) * p_older) / i;
    p_older = p_prev;
    p_prev = p_i;
  }
  return dp;
}

/// n orthonormal shifted Legendre functions g_{t,0..n-1} on [0, t].
class Basis {
 public:
  Basis(std::size_t n, double t) : n_(n), t_(t) {
    if (n == 0) throw InputError("Basis: n must be >= 1");
    if (!(t > 0.0) || !std::isfinite(t)) {
      throw DomainError("Basis: horizon t must be positive and finite");
    }
  }

  std::size_t size() const noexcept { return n_; }
  double horizon() const noexcept { return t_; }

  /// Maps [0, t] onto [-1, 1].
  double to_unit(double tau) const noexcept { return 2.0 * tau / t_ - 1.0; }

 private:
  std::size_t n_;
  double t_;
};

/// Coefficients of a signal history in the basis of horizon t.
struct CoefVector {
  double t = 1.0;
  Vector c;
};

struct Sample {
  double tau;
  double value;
};

/// sqrt(2i+1) * P_i(2 tau / t - 1). tau may lie outside [0, t].
inline double basis_eval(const Basis& b, std::size_t i, double tau) {
  if (i >= b.size()) {
    std::ostringstream msg;
    msg << "basis_eval: index " << i << " out of range for n = " << b.size();
    throw InputError(msg.str());
  }
  const auto deg = static_cast<int>(i);
  return std::sqrt(2.0 * deg + 1.0) * legendre_eval(deg, b.to_unit(tau));
}

namespace detail {

// All n basis values at one point, computed with a single recurrence pass.
inline void basis_values(const Basis& b, double tau, std::vector<double>& out) {
  const std::size_t n = b.size();
  out.resize(n);
  const double x = b.to_unit(tau);
  double prev = 1.0;
  double cur = x;
  out[0] = 1.0;
  if (n > 1) out[1] = std::sqrt(3.0) * x;
  for (std::size_t i = 2; i < n; ++i) {
    const double k = static_cast<double>(i - 1);
    const double next = ((2.0 * k + 1.0) * x * cur - k * prev) / (k + 1.0);
    prev = cur;
    cur = next;
    out[i] = std::sqrt(2.0 * static_cast<double>(i) + 1.0) * cur;
  }
}

}  // namespace detail

/// c_i = <f, g_{t,i}>_t with composite trapezoidal quadrature over the
/// caller's samples. Regions of [0, t] not covered by samples contribute 0.
inline CoefVector project(const Basis& b, std::span<const Sample> samples) {
  if (samples.size() < 2) {
    throw InputError("project: need at least 2 samples");
  }
  for (std::size_t j = 0; j < samples.size(); ++j) {
    const Sample& s = samples[j];
    if (!std::isfinite(s.tau) || !std::isfinite(s.value)) {
      throw InputError("project: samples must be finite");
    }
    if (s.tau < 0.0 || s.tau > b.horizon()) {
      throw InputError("project: sample time outside [0, t]");
    }
    if (j > 0 && !(s.tau > samples[j - 1].tau)) {
      throw InputError("project: samples must be strictly increasing in tau");
    }
  }
  const std::size_t n = b.size();
  Vector c = Vector::Zero(static_cast<Eigen::Index>(n));
  std::vector<double> g_left;
  std::vector<double> g_right;
  detail::basis_values(b, samples[0].tau, g_left);
  for (std::size_t j = 1; j < samples.size(); ++j) {
    detail::basis_values(b, samples[j].tau, g_right);
    const double h = samples[j].tau - samples[j - 1].tau;
    for (std::size_t i = 0; i < n; ++i) {
      c(static_cast<Eigen::Index>(i)) +=
          0.5 * h *
          (samples[j - 1].value * g_left[i] + samples[j].value * g_right[i]);
    }
    std::swap(g_left, g_right);
  }
  c /= b.horizon();
  return {b.horizon(), std::move(c)};
}

/// f_hat(tau) = sum_i c_i g_{t,i}(tau) at every requested tau.
inline std::vector<double> reconstruct(const Basis& b, const CoefVector& coef,
                                       std::span<const double> taus) {
  if (static_cast<std::size_t>(coef.c.size()) != b.size()) {
    throw DimensionError("reconstruct: coefficient length does not match basis");
  }
  std::vector<double> out;
  out.reserve(taus.size());
  std::vector<double> g;
  for (double tau : taus) {
    detail::basis_values(b, tau, g);
    double acc = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      acc += coef.c(static_cast<Eigen::Index>(i)) * g[i];
    }
    out.push_back(acc);
  }
  return out;
}

/// Convenience: reconstruction of raw coefficients on horizon t.
inline std::vector<double> reconstruct(const Vector& c, double t,
                                       std::span<const double> taus) {
  const Basis b(static_cast<std::size_t>(c.size()), t);
  return reconstruct(b, CoefVector{t, c}, taus);
}

}  // namespace unhippo

#pragma once

// Kalman filtering of the regularized latent dynamics
//   c_k = Abar_k c_{k-1} + q_k,   y_k = B^T c_k + eps_k,
// and the UnHiPPO matrices obtained by folding predict and update into
//   m_k = (I - K_k B^T) Abar_k m_{k-1} + K_k y_k.
// The covariance recursion never looks at y, so the (A_U, B_U) sequence is
// a fixed property of (n, sigma2, Sigma, scheme) and can be tabulated.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "unhippo/errors.hpp"
#include "unhippo/hippo.hpp"
#include "unhippo/matfun.hpp"
#include "unhippo/regularized.hpp"

namespace unhippo {

inline constexpr double kPsdTolerance = -1e-8;
inline constexpr double kMinProcessScale = 1e-6;

struct KalmanState {
  std::size_t k = 0;
  Vector m;
  Matrix p;
};

/// Observation noise sigma2 and process noise Sigma = process_scale * I.
/// sigma2 is a filtering-strength knob, not the data's noise variance: it
/// has to dominate B^T P B, which is large for the HiPPO basis.
struct NoiseConfig {
  double sigma2 = 1e10;
  double process_scale = 1.0;

  void validate() const {
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
      throw InputError("NoiseConfig: sigma2 must be positive and finite");
    }
    if (!(process_scale > 0.0) || !std::isfinite(process_scale)) {
      throw InputError("NoiseConfig: process_scale must be positive and finite");
    }
  }

  Matrix sigma(std::size_t n) const {
    const auto size = static_cast<Eigen::Index>(n);
    return process_scale * Matrix::Identity(size, size);
  }
};

/// Prior N(0, I) at k = 0.
inline KalmanState standard_prior(std::size_t n) {
  const auto size = static_cast<Eigen::Index>(n);
  return {0, Vector::Zero(size), Matrix::Identity(size, size)};
}

struct Prediction {
  Vector m;
  Matrix p;
};

inline Prediction kalman_predict(const KalmanState& state, const Matrix& a_bar,
                                 const Matrix& sigma) {
  const Eigen::Index n = state.m.size();
  if (a_bar.rows() != n || a_bar.cols() != n || state.p.rows() != n ||
      state.p.cols() != n || sigma.rows() != n || sigma.cols() != n) {
    throw DimensionError("kalman_predict: inconsistent dimensions");
  }
  return {a_bar * state.m, a_bar * state.p * a_bar.transpose() + sigma};
}

namespace detail {

struct Gain {
  Vector k;
  double s;
};

inline Gain kalman_gain(const Matrix& p_minus, const Vector& b, double sigma2) {
  const Vector pb = p_minus * b;
  const double s = b.dot(pb) + sigma2;
  if (!(s > 0.0) || !std::isfinite(s)) {
    std::ostringstream msg;
    msg << "kalman_update: innovation variance is not positive (s = " << s
        << ")";
    throw NumericError(msg.str());
  }
  return {pb / s, s};
}

inline Matrix posterior_cov(const Matrix& p_minus, const Gain& g) {
  return symmetrize(p_minus - g.s * g.k * g.k.transpose());
}

}  // namespace detail

/// Conditions the prediction on one scalar observation y = b^T c + eps.
inline KalmanState kalman_update(const Prediction& pred, double y,
                                 const Vector& b, double sigma2,
                                 std::size_t k = 0) {
  if (!(sigma2 > 0.0)) throw InputError("kalman_update: sigma2 must be positive");
  if (b.size() != pred.m.size() || pred.p.rows() != b.size()) {
    throw DimensionError("kalman_update: inconsistent dimensions");
  }
  const detail::Gain g = detail::kalman_gain(pred.p, b, sigma2);
  const double v = y - b.dot(pred.m);
  return {k, pred.m + g.k * v, detail::posterior_cov(pred.p, g)};
}

struct UnhippoPair {
  Matrix a_u;
  Vector b_u;
  Matrix p;  // posterior covariance after the step
};

/// Covariance-only predict + update from the state at k-1 through a_bar_k.
/// Returns A_U = (I - K B^T) a_bar_k, B_U = K and the new covariance.
inline UnhippoPair extract_unhippo_pair(const KalmanState& before,
                                        const Matrix& a_bar_k, const Vector& b,
                                        const NoiseConfig& noise) {
  noise.validate();
  const Eigen::Index n = b.size();
  if (before.p.rows() != n || a_bar_k.rows() != n || a_bar_k.cols() != n) {
    throw DimensionError("extract_unhippo_pair: inconsistent dimensions");
  }
  const Matrix p_minus =
      a_bar_k * before.p * a_bar_k.transpose() + noise.sigma(static_cast<std::size_t>(n));
  const detail::Gain g = detail::kalman_gain(p_minus, b, noise.sigma2);
  Matrix a_u = a_bar_k - g.k * (b.transpose() * a_bar_k);
  return {std::move(a_u), g.k, detail::posterior_cov(p_minus, g)};
}

inline double min_eigenvalue(const Matrix& p) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(p, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// Full filter over the regularized dynamics with observations at
/// t_k = k (k = 1..T) and t_0 := t_1. Returns the posterior after each step.
inline std::vector<KalmanState> run_filter(const RegularizedSystem& sys,
                                           const NoiseConfig& noise,
                                           Scheme scheme,
                                           const std::vector<double>& ys) {
  noise.validate();
  std::vector<KalmanState> out;
  out.reserve(ys.size());
  KalmanState state = standard_prior(sys.n);
  const Matrix sigma = noise.sigma(sys.n);
  for (std::size_t idx = 0; idx < ys.size(); ++idx) {
    const std::size_t k = idx + 1;
    const double t_prev = k == 1 ? 1.0 : static_cast<double>(k - 1);
    const Matrix a_bar = transition(sys, t_prev, static_cast<double>(k), scheme);
    const Prediction pred = kalman_predict(state, a_bar, sigma);
    state = kalman_update(pred, ys[idx], sys.b, noise.sigma2, k);
    out.push_back(state);
  }
  return out;
}

enum class BankKind { hippo, unhippo };

inline std::string_view to_string(BankKind kind) {
  return kind == BankKind::hippo ? "hippo" : "unhippo";
}

inline std::optional<BankKind> parse_bank_kind(std::string_view name) {
  if (name == "hippo") return BankKind::hippo;
  if (name == "unhippo") return BankKind::unhippo;
  return std::nullopt;
}

inline Scheme default_scheme(BankKind kind) {
  return kind == BankKind::hippo ? Scheme::trapezoidal_lssl : Scheme::closed_form;
}

struct BankPair {
  Matrix a_bar;
  Vector b_bar;
};

/// (A_k, B_k) for every integer step k = 1..t_max.
struct InitBank {
  std::size_t n = 0;
  std::size_t t_max = 0;
  BankKind kind = BankKind::unhippo;
  Scheme scheme = Scheme::closed_form;
  double sigma2 = 0.0;
  double process_scale = 0.0;
  std::string provenance;
  std::vector<BankPair> pairs;

  /// 1-based access, matching the step index.
  const BankPair& at(std::size_t k) const {
    if (k < 1 || k > pairs.size()) {
      throw InputError("InitBank::at: step " + std::to_string(k) +
                       " outside [1, " + std::to_string(pairs.size()) + "]");
    }
    return pairs[k - 1];
  }
};

struct BankOptions {
  /// Abort when a posterior covariance eigenvalue drops below kPsdTolerance.
  bool check_psd = true;
  /// Receives every posterior covariance (unhippo banks only).
  std::vector<Matrix>* covariances = nullptr;
};

inline bool scheme_valid_for(BankKind kind, Scheme scheme) {
  if (kind == BankKind::hippo) return scheme != Scheme::closed_form;
  return scheme != Scheme::trapezoidal_lssl;
}

inline InitBank build_init_bank(std::size_t n, std::size_t t_max, BankKind kind,
                                const NoiseConfig& noise, Scheme scheme,
                                const BankOptions& options = {}) {
  if (n == 0) throw InputError("build_init_bank: n must be >= 1");
  if (t_max == 0) throw InputError("build_init_bank: t_max must be >= 1");
  if (!scheme_valid_for(kind, scheme)) {
    throw InputError("build_init_bank: scheme " + std::string(to_string(scheme)) +
                     " is not available for kind " + std::string(to_string(kind)));
  }
  InitBank bank;
  bank.n = n;
  bank.t_max = t_max;
  bank.kind = kind;
  bank.scheme = scheme;
  bank.pairs.reserve(t_max);
  const HippoSystem hippo = make_hippo(n);

  if (kind == BankKind::hippo) {
    for (std::size_t k = 1; k <= t_max; ++k) {
      try {
        const DiscretePair d = discretize_hippo_ending_at(
            hippo, scheme, static_cast<double>(k), 1.0);
        bank.pairs.push_back({d.a_bar, d.input_weight()});
      } catch (const NumericError& e) {
        throw NumericError(std::string("build_init_bank: ") + e.what(), k);
      }
    }
    return bank;
  }

  noise.validate();
  bank.sigma2 = noise.sigma2;
  bank.process_scale = noise.process_scale;
  const RegularizedSystem reg = make_regularized(hippo);
  KalmanState state = standard_prior(n);
  for (std::size_t k = 1; k <= t_max; ++k) {
    try {
      const double t_prev = k == 1 ? 1.0 : static_cast<double>(k - 1);
      const Matrix a_bar = transition(reg, t_prev, static_cast<double>(k), scheme);
      UnhippoPair pair = extract_unhippo_pair(state, a_bar, reg.b, noise);
      if (!pair.a_u.allFinite() || !pair.b_u.allFinite() || !pair.p.allFinite()) {
        throw NumericError("non-finite UnHiPPO pair");
      }
      if (options.check_psd) {
        const double lo = min_eigenvalue(pair.p);
        if (lo < kPsdTolerance) {
          std::ostringstream msg;
          msg << "posterior covariance lost positive semi-definiteness "
                 "(min eigenvalue "
              << lo << ")";
          throw NumericError(msg.str());
        }
      }
      if (options.covariances != nullptr) options.covariances->push_back(pair.p);
      state.k = k;
      state.p = std::move(pair.p);
      bank.pairs.push_back({std::move(pair.a_u), std::move(pair.b_u)});
    } catch (const NumericError& e) {
      if (e.step()) throw;
      throw NumericError(std::string("build_init_bank: ") + e.what(), k);
    } catch (const InputError& e) {
      throw NumericError(std::string("build_init_bank: ") + e.what(), k);
    }
  }
  return bank;
}

/// Bank indices floor(t) for h times spaced log-uniformly over
/// [t_min, t_max]; h = 1 yields t_min.
inline std::vector<std::size_t> timescale_indices(std::size_t bank_t_max,
                                                  std::size_t h, double t_min,
                                                  double t_max) {
  if (h == 0) throw InputError("select_timescales: h must be >= 1");
  if (!(t_min >= 1.0) || !(t_max >= t_min) ||
      !(t_max <= static_cast<double>(bank_t_max))) {
    throw InputError("select_timescales: need 1 <= t_min <= t_max <= bank t_max");
  }
  std::vector<std::size_t> out;
  out.reserve(h);
  for (std::size_t i = 0; i < h; ++i) {
    double t = t_min;
    if (h > 1) {
      const double frac = static_cast<double>(i) / static_cast<double>(h - 1);
      t = t_min * std::pow(t_max / t_min, frac);
    }
    // Grid points that land a few ulps under an integer still mean that integer.
    auto idx = static_cast<std::size_t>(std::floor(t * (1.0 + 1e-12)));
    idx = std::clamp<std::size_t>(idx, static_cast<std::size_t>(t_min),
                                  static_cast<std::size_t>(t_max));
    out.push_back(idx);
  }
  return out;
}

inline std::vector<BankPair> select_timescales(const InitBank& bank,
                                               std::size_t h, double t_min,
                                               double t_max) {
  std::vector<BankPair> out;
  for (std::size_t k : timescale_indices(bank.t_max, h, t_min, t_max)) {
    out.push_back(bank.at(k));
  }
  return out;
}

}  // namespace unhippo

#pragma once

// Experiments shared by the CLI subcommands and the acceptance checks.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "unhippo.hpp"

namespace unhippo::cli {

// ---- reconstruction helpers -------------------------------------------------

inline double recon_at(const Vector& c, double u) {
  const double tau[1] = {u};
  return reconstruct(c, 1.0, tau)[0];
}

/// Location of the largest reconstruction value on [lo, hi] (relative
/// coordinates): grid scan, then golden-section refinement.
inline double peak_position(const Vector& c, double lo, double hi) {
  const int grid = 4000;
  double best_u = lo, best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= grid; ++i) {
    const double u = lo + (hi - lo) * i / grid;
    const double v = recon_at(c, u);
    if (v > best) {
      best = v;
      best_u = u;
    }
  }
  const double h = (hi - lo) / grid;
  double a = std::max(lo, best_u - h), b = std::min(hi, best_u + h);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = recon_at(c, x1), f2 = recon_at(c, x2);
  while (b - a > 1e-13) {
    if (f1 > f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = recon_at(c, x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = recon_at(c, x2);
    }
  }
  return 0.5 * (a + b);
}

inline Vector project_function(std::size_t n, double t, std::size_t samples,
                               const std::function<double(double)>& f) {
  std::vector<Sample> s;
  s.reserve(samples);
  for (double tau : equispaced(samples, 0.0, t)) s.push_back({tau, f(tau)});
  return project(Basis(n, t), s).c;
}

// ---- time invariance --------------------------------------------------------

struct CompressionResult {
  Vector before;
  Vector after;
  std::vector<double> peaks;  // peak position after 0..steps applications
  double expected = 0.0;      // (k-1)/k to the power steps
  double rollout = 0.0;       // accumulated per-application horizon ratio
  double measured = 0.0;      // peak(after) / peak(before)
};

/// A bump at relative position `center`, pushed through the fixed
/// UnHiPPO pair at step k `steps` times with no input.
inline CompressionResult compression_rollout(std::size_t n = 64, std::size_t k = 500,
                                             std::size_t steps = 250,
                                             double center = 0.5, double width = 0.05,
                                             bool track_peaks = false) {
  const InitBank bank =
      build_init_bank(n, k, BankKind::unhippo, NoiseConfig{}, Scheme::closed_form);
  const Matrix& a_u = bank.at(k).a_bar;
  CompressionResult out;
  out.before = project_function(n, 1.0, 20001, [&](double u) {
    const double z = (u - center) / width;
    return std::exp(-0.5 * z * z);
  });
  const double p0 = peak_position(out.before, 0.0, 1.0);
  const double step_ratio = static_cast<double>(k - 1) / static_cast<double>(k);
  out.expected = std::pow(step_ratio, static_cast<double>(steps));
  out.rollout = 1.0;
  Vector c = out.before;
  if (track_peaks) out.peaks.push_back(p0);
  for (std::size_t j = 1; j <= steps; ++j) {
    c = a_u * c;
    out.rollout *= step_ratio;
    if (track_peaks) {
      out.peaks.push_back(peak_position(c, 0.0, std::min(1.0, 2.0 * center * out.rollout)));
    }
  }
  out.after = c;
  // The search window follows the expected position; the far end of the
  // domain can carry small ripples that are not the feature.
  out.measured = peak_position(c, 0.0, std::min(1.0, 2.0 * center * out.expected)) / p0;
  return out;
}

// ---- repeated application ---------------------------------------------------

/// HiPPO transition from t_from to t_to; closed form is the exact
/// input-free propagator exp(-ln(t_to/t_from) A).
inline Matrix hippo_transition(const HippoSystem& sys, Scheme scheme, double t_from,
                               double t_to) {
  if (scheme == Scheme::closed_form) return expm(-std::log(t_to / t_from) * sys.a);
  return discretize_hippo_ending_at(sys, scheme, t_to, t_to - t_from).a_bar;
}

struct GrowthResult {
  std::vector<double> norm_ratio;  // ||A^j c|| / ||c||, j = 0..powers
  std::vector<Vector> states;      // A^j c at the snapshot steps
  double max_growth = 0.0;
};

inline std::vector<double> stability_signal(std::size_t k) {
  std::vector<double> ys(k);
  for (std::size_t j = 1; j <= k; ++j) {
    ys[j - 1] = std::sin(2.0 * std::numbers::pi * 1.5 * static_cast<double>(j) /
                         static_cast<double>(k)) + 0.3;
  }
  return ys;
}

/// Encodes a smooth signal over k steps with the kind's default bank, then
/// applies the kind's step-k transition under `scheme` `powers` times.
inline GrowthResult repeated_application(BankKind kind, Scheme scheme, std::size_t n,
                                         std::size_t k, std::size_t powers,
                                         const std::vector<std::size_t>& snapshots = {},
                                         bool check_psd = true) {
  const std::vector<double> ys = stability_signal(k);
  const NoiseConfig noise{};
  Matrix step;
  Vector c0;
  if (kind == BankKind::unhippo) {
    BankOptions options;
    options.check_psd = check_psd;
    const InitBank bank = build_init_bank(n, k, kind, noise, scheme, options);
    step = bank.at(k).a_bar;
    c0 = run_bank(bank, ys).c_final;
  } else {
    const HippoSystem sys = make_hippo(n);
    step = hippo_transition(sys, scheme, static_cast<double>(k - 1), static_cast<double>(k));
    const InitBank bank = build_init_bank(n, k, kind, noise, default_scheme(kind));
    c0 = run_bank(bank, ys).c_final;
  }
  GrowthResult out;
  const double base = c0.norm();
  Vector c = c0;
  out.norm_ratio.push_back(1.0);
  out.max_growth = 1.0;
  if (std::find(snapshots.begin(), snapshots.end(), 0) != snapshots.end()) out.states.push_back(c);
  for (std::size_t j = 1; j <= powers; ++j) {
    c = step * c;
    const double r = c.allFinite() ? c.norm() / base : std::numeric_limits<double>::infinity();
    out.norm_ratio.push_back(r);
    out.max_growth = std::max(out.max_growth, std::isnan(r) ? INFINITY : r);
    if (std::find(snapshots.begin(), snapshots.end(), j) != snapshots.end()) out.states.push_back(c);
  }
  return out;
}

// ---- denoising --------------------------------------------------------------

/// Horizon values of the kind's recurrence over `ys` (bank length = signal length).
inline std::vector<double> denoise_horizon(std::span<const double> ys, std::size_t n,
                                           BankKind kind, const NoiseConfig& noise,
                                           Scheme scheme) {
  const InitBank bank = build_init_bank(n, ys.size(), kind, noise, scheme);
  return run_bank(bank, ys).horizon;
}

inline SignalTrace gp_trace(std::uint64_t seed, double rho = 0.1, std::size_t points = 250,
                            double t_end = 10.0, double length_scale = 1.0) {
  // Noise gets its own stream so the clean draw does not depend on rho.
  return add_noise(sample_gp(points, t_end, length_scale, seed), rho,
                   seed ^ 0x9E3779B97F4A7C15ULL);
}

// ---- discretization timing --------------------------------------------------

struct BenchRow {
  Scheme scheme;
  double median_ms;
};

inline std::vector<Scheme> benchmark_schemes() {
  return {Scheme::closed_form, Scheme::trapezoidal, Scheme::forward, Scheme::backward};
}

/// Median wall time to build one regularized transition k-1 -> k per scheme.
inline std::vector<BenchRow> bench_disc(std::size_t n, std::size_t reps, std::size_t k = 10) {
  const RegularizedSystem sys = make_regularized(make_hippo(n));
  std::vector<BenchRow> rows;
  double sink = 0.0;
  for (Scheme scheme : benchmark_schemes()) {
    std::vector<double> ms;
    for (std::size_t r = 0; r < reps; ++r) {
      const auto start = std::chrono::steady_clock::now();
      const Matrix t = transition(sys, static_cast<double>(k - 1), static_cast<double>(k), scheme);
      const auto stop = std::chrono::steady_clock::now();
      sink += t(0, 0);
      ms.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
    }
    std::sort(ms.begin(), ms.end());
    const std::size_t mid = ms.size() / 2;
    const double median = ms.size() % 2 ? ms[mid] : 0.5 * (ms[mid - 1] + ms[mid]);
    rows.push_back({scheme, median});
  }
  if (std::isnan(sink)) rows.front().median_ms = std::numeric_limits<double>::quiet_NaN();
  return rows;
}

}  // namespace unhippo::cli

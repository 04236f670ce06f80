#pragma once

// Data (CSV) and SVG plots for each figure selector.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "experiments.hpp"
#include "svg.hpp"

namespace unhippo::cli {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

inline const std::vector<std::string>& figure_names() {
  static const std::vector<std::string> names{"legendre",     "extrapolation",
                                              "comparison",   "sigma-effect",
                                              "time-invariance", "discretizations"};
  return names;
}

namespace figures {

inline KeyValues legendre(const std::string& dir, std::uint64_t seed) {
  KeyValues kv;
  Plot basis{"Shifted Legendre basis, t = 1", "tau", equispaced(401, 0.0, 1.0), {}, false};
  const Basis b6(6, 1.0);
  for (std::size_t i = 0; i < 6; ++i) {
    Series s{"g" + std::to_string(i), {}};
    for (double tau : basis.x) s.y.push_back(basis_eval(b6, i, tau));
    basis.series.push_back(std::move(s));
  }
  kv.emplace_back("file", emit_plot(dir, "legendre_basis", basis));

  const std::size_t n = 16;
  const SignalTrace trace = sample_gp(1001, 1.0, 0.1, seed);
  std::vector<Sample> samples;
  for (std::size_t i = 0; i < trace.size(); ++i) samples.push_back({trace.taus[i], trace.clean[i]});
  const Basis basis_n(n, 1.0);
  const CoefVector c = project(basis_n, samples);
  const std::vector<double> rec = reconstruct(basis_n, c, trace.taus);
  Plot proj{"Projection onto 16 coefficients", "tau", trace.taus,
            {{"signal", trace.clean}, {"reconstruction", rec}}, false};
  kv.emplace_back("file", emit_plot(dir, "legendre_projection", proj));
  kv.emplace_back("projection_mse", format_double(mse(rec, trace.clean)));
  return kv;
}

inline KeyValues extrapolation(const std::string& dir, std::uint64_t seed) {
  KeyValues kv;
  const std::size_t n = 32;
  const double t0 = 1.0, t1 = 1.25;
  const SignalTrace trace = sample_gp(2001, t0, 0.3, seed);
  std::vector<Sample> samples;
  for (std::size_t i = 0; i < trace.size(); ++i) samples.push_back({trace.taus[i], trace.clean[i]});
  const CoefVector c = project(Basis(n, t0), samples);
  const HippoSystem sys = make_hippo(n);
  const Vector plain = transition(data_free_matrix(sys), t0, t1, Scheme::closed_form) * c.c;
  const Vector reg = transition(make_regularized(sys), t0, t1, Scheme::closed_form) * c.c;

  const std::vector<double> taus = equispaced(501, 0.0, t1);
  const std::vector<double> fit = reconstruct(c.c, t0, taus);
  std::vector<double> fit_shown(fit);
  for (std::size_t i = 0; i < taus.size(); ++i) {
    if (taus[i] > t0) fit_shown[i] = std::numeric_limits<double>::quiet_NaN();
  }
  const std::vector<double> r_plain = reconstruct(plain, t1, taus);
  const std::vector<double> r_reg = reconstruct(reg, t1, taus);
  Plot plot{"Extension past the observed horizon", "tau", taus,
            {{"fit", fit_shown}, {"unregularized", r_plain}, {"regularized", r_reg}}, false};
  kv.emplace_back("file", emit_plot(dir, "extrapolation", plot));

  const double end_value = endpoint_value(sys.b, c.c);
  double dev_plain = 0.0, dev_reg = 0.0;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    if (taus[i] <= t0) continue;
    dev_plain = std::max(dev_plain, std::abs(r_plain[i] - end_value));
    dev_reg = std::max(dev_reg, std::abs(r_reg[i] - end_value));
  }
  kv.emplace_back("max_dev_unregularized", format_double(dev_plain));
  kv.emplace_back("max_dev_regularized", format_double(dev_reg));
  return kv;
}

inline KeyValues comparison(const std::string& dir, std::uint64_t seed) {
  KeyValues kv;
  const SignalTrace trace = gp_trace(seed);
  const std::size_t n = 64;
  const auto hippo = denoise_horizon(trace.noisy, n, BankKind::hippo, NoiseConfig{},
                                     default_scheme(BankKind::hippo));
  const auto unhippo = denoise_horizon(trace.noisy, n, BankKind::unhippo, NoiseConfig{},
                                       default_scheme(BankKind::unhippo));
  Plot plot{"Online reconstruction of a noisy trace", "tau", trace.taus,
            {{"clean", trace.clean}, {"noisy", trace.noisy}, {"hippo", hippo},
             {"unhippo", unhippo}}, false};
  kv.emplace_back("file", emit_plot(dir, "comparison", plot));
  kv.emplace_back("mse_hippo", format_double(mse(hippo, trace.clean)));
  kv.emplace_back("mse_unhippo", format_double(mse(unhippo, trace.clean)));
  return kv;
}

inline const std::vector<double>& sigma_grid() {
  static const std::vector<double> grid{1e6, 1e8, 1e10, 1e12};
  return grid;
}

inline KeyValues sigma_effect(const std::string& dir, std::uint64_t seed) {
  KeyValues kv;
  const SignalTrace trace = gp_trace(seed);
  Plot plot{"Effect of sigma2 on the reconstruction", "tau", trace.taus,
            {{"noisy", trace.noisy}}, false};
  for (double sigma2 : sigma_grid()) {
    const auto rec = denoise_horizon(trace.noisy, 64, BankKind::unhippo, NoiseConfig{sigma2, 1.0},
                                     Scheme::closed_form);
    const std::string tag = "1e" + std::to_string(std::lround(std::log10(sigma2)));
    plot.series.push_back({"sigma2=" + tag, rec});
    kv.emplace_back("roughness_" + tag, format_double(roughness(rec)));
  }
  kv.insert(kv.begin(), {"file", emit_plot(dir, "sigma_effect", plot)});
  return kv;
}

inline KeyValues time_invariance(const std::string& dir, std::uint64_t) {
  KeyValues kv;
  const CompressionResult r = compression_rollout(64, 500, 250, 0.5, 0.05, true);
  const std::vector<double> us = equispaced(1001, 0.0, 1.0);
  Plot recon{"Reconstruction before and after 250 applications", "u", us,
             {{"before", reconstruct(r.before, 1.0, us)}, {"after", reconstruct(r.after, 1.0, us)}},
             false};
  kv.emplace_back("file", emit_plot(dir, "time_invariance", recon));
  std::vector<double> steps, expected;
  for (std::size_t j = 0; j < r.peaks.size(); ++j) {
    steps.push_back(static_cast<double>(j));
    expected.push_back(r.peaks.front() * std::pow(499.0 / 500.0, static_cast<double>(j)));
  }
  Plot rollout{"Peak position during the roll-out", "step", steps,
               {{"peak", r.peaks}, {"expected", expected}}, false};
  kv.emplace_back("file", emit_plot(dir, "time_invariance_rollout", rollout));
  kv.emplace_back("compression_expected", format_double(r.expected));
  kv.emplace_back("compression_rollout", format_double(r.rollout));
  kv.emplace_back("compression_measured", format_double(r.measured));
  kv.emplace_back("peak_before", format_double(r.peaks.front()));
  kv.emplace_back("peak_after", format_double(r.peaks.back()));
  return kv;
}

inline KeyValues discretizations(const std::string& dir, std::uint64_t) {
  KeyValues kv;
  const std::size_t n = 64, k = 10, powers = 250;
  const std::vector<std::size_t> snaps{0, 10, 50, 250};
  const std::vector<double> us = equispaced(501, 0.0, 1.0);
  std::vector<double> steps;
  for (std::size_t j = 0; j <= powers; ++j) steps.push_back(static_cast<double>(j));
  Plot norms{"State norm under repeated application (k = 10)", "step", steps, {}, true};
  std::size_t sets = 0;
  for (BankKind kind : {BankKind::hippo, BankKind::unhippo}) {
    for (Scheme scheme : benchmark_schemes()) {
      const std::string tag = std::string(to_string(kind)) + "_" + std::string(to_string(scheme));
      std::optional<GrowthResult> g;
      try {
        // Unstable schemes are the point of this figure, so no PSD guard.
        g = repeated_application(kind, scheme, n, k, powers, snaps, false);
      } catch (const NumericError& e) {
        kv.emplace_back("error_" + tag, e.what());
      }
      if (!g) {
        kv.emplace_back("growth_" + tag, "inf");
        continue;
      }
      Plot recon{tag + ": reconstruction after j applications", "u", us, {}, false};
      for (std::size_t s = 0; s < g->states.size(); ++s) {
        std::vector<double> y(us.size(), std::numeric_limits<double>::quiet_NaN());
        if (g->states[s].allFinite()) y = reconstruct(g->states[s], 1.0, us);
        recon.series.push_back({"j=" + std::to_string(snaps[s]), std::move(y)});
      }
      kv.emplace_back("file", emit_plot(dir, "discretizations_" + tag, recon));
      norms.series.push_back({tag, g->norm_ratio});
      kv.emplace_back("growth_" + tag, format_double(g->max_growth));
      ++sets;
    }
  }
  kv.emplace_back("file", emit_plot(dir, "discretizations_norms", norms));
  kv.emplace_back("sets", std::to_string(sets));
  return kv;
}

}  // namespace figures

/// Runs one figure by name; returns nullopt for an unknown selector.
inline std::optional<KeyValues> run_figure(const std::string& which, const std::string& dir,
                                           std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  if (which == "legendre") return figures::legendre(dir, seed);
  if (which == "extrapolation") return figures::extrapolation(dir, seed);
  if (which == "comparison") return figures::comparison(dir, seed);
  if (which == "sigma-effect") return figures::sigma_effect(dir, seed);
  if (which == "time-invariance") return figures::time_invariance(dir, seed);
  if (which == "discretizations") return figures::discretizations(dir, seed);
  return std::nullopt;
}

}  // namespace unhippo::cli

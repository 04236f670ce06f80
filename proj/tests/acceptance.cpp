// Prints one PASS/FAIL line per primary acceptance criterion; exits
// non-zero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "experiments.hpp"
#include "oracles.hpp"
#include "test_util.hpp"
#include "unhippo.hpp"

using namespace unhippo;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string sci(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

Outcome hippo_identity() {
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (std::size_t n : {2, 8, 64, 256}) {
    const HippoSystem s = make_hippo(n);
    const auto size = static_cast<Eigen::Index>(n);
    const Matrix lhs = s.b * s.b.transpose() - s.a;
    const Matrix rhs = s.a.transpose() - Matrix::Identity(size, size);
    worst = std::max(worst, max_abs(lhs - rhs));
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {worst < 1e-10 && secs < 1.0,
          "max deviation " + sci(worst) + " (< 1e-10), " + sci(secs) + " s (< 1 s)"};
}

Outcome basis_orthonormality() {
  const Matrix g = testing::simpson_gram(16, 3.0, 10000);
  const double dev = max_abs(g - Matrix::Identity(16, 16));
  return {dev < 1e-6, "max |G - I| " + sci(dev) + " (< 1e-6)"};
}

Outcome kalman_oracle() {
  const NoiseConfig noise{1.0, 1.0};
  const RegularizedSystem sys = make_regularized(make_hippo(6));
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> normal;
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> ys(8);
    for (double& y : ys) y = normal(rng);
    const auto states = run_filter(sys, noise, Scheme::closed_form, ys);
    const testing::Gaussian oracle = testing::trajectory_posterior(sys, noise, ys);
    worst = std::max({worst, max_abs(states.back().m - oracle.mean),
                      max_abs(states.back().p - oracle.cov)});
  }
  return {worst < 1e-8, "max deviation over 5 draws " + sci(worst) + " (< 1e-8)"};
}

std::vector<double> random_observations(std::uint64_t seed, std::size_t count, double scale) {
  NormalSource normal(seed);
  std::vector<double> ys(count);
  for (std::size_t k = 0; k < count; ++k) {
    ys[k] = std::sin(0.01 * static_cast<double>(k)) + scale * normal();
  }
  return ys;
}

Outcome regrouping() {
  const std::size_t n = 128, steps = 1000;
  const NoiseConfig noise{};
  const RegularizedSystem sys = make_regularized(make_hippo(n));
  const InitBank bank = build_init_bank(n, steps, BankKind::unhippo, noise, Scheme::closed_form);
  const auto ys = random_observations(1, steps, 0.5);
  const auto states = run_filter(sys, noise, Scheme::closed_form, ys);
  Vector m = Vector::Zero(static_cast<Eigen::Index>(n));
  double worst = 0.0, scale = 0.0;
  for (std::size_t k = 1; k <= steps; ++k) {
    m = bank.at(k).a_bar * m + bank.at(k).b_bar * ys[k - 1];
    worst = std::max(worst, max_abs(m - states[k - 1].m));
    scale = std::max(scale, max_abs(states[k - 1].m));
  }
  return {worst < 1e-10, "max |m_regrouped - m_filter| " + sci(worst) + " (< 1e-10), max |m| " +
                             sci(scale)};
}

Outcome covariance_independence() {
  const std::size_t n = 64, steps = 500;
  const RegularizedSystem sys = make_regularized(make_hippo(n));
  const auto a = run_filter(sys, NoiseConfig{}, Scheme::closed_form, random_observations(2, steps, 0.1));
  const auto b = run_filter(sys, NoiseConfig{}, Scheme::closed_form, random_observations(3, steps, 10.0));
  std::size_t differing = 0;
  for (std::size_t k = 0; k < steps; ++k) {
    if (a[k].p.size() != b[k].p.size() ||
        std::memcmp(a[k].p.data(), b[k].p.data(), sizeof(double) * a[k].p.size()) != 0) {
      ++differing;
    }
  }
  return {differing == 0, std::to_string(differing) + " of " + std::to_string(steps) +
                              " covariances differ bitwise"};
}

Outcome compression() {
  const cli::CompressionResult r = cli::compression_rollout(64, 500, 250);
  const double rel = std::abs(r.measured / r.expected - 1.0);
  const double rollout_rel = std::abs(r.rollout / r.expected - 1.0);
  return {rel < 0.02, "measured " + std::to_string(r.measured) + " vs (499/500)^250 = " +
                          std::to_string(r.expected) + ", relative error " + sci(rel) +
                          " (< 2%); accumulated step ratio error " + sci(rollout_rel)};
}

Outcome stability() {
  const auto start = std::chrono::steady_clock::now();
  const auto closed =
      cli::repeated_application(BankKind::unhippo, Scheme::closed_form, 64, 10, 250);
  const auto trap = cli::repeated_application(BankKind::unhippo, Scheme::trapezoidal, 64, 10, 250);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {closed.max_growth <= 10.0 && trap.max_growth >= 1e3 && secs < 10.0,
          "closed-form growth " + sci(closed.max_growth) + " (<= 10), trapezoidal growth " +
              sci(trap.max_growth) + " (>= 1e3), " + sci(secs) + " s (< 10 s)"};
}

Outcome denoising() {
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SignalTrace trace = cli::gp_trace(seed);
    const auto hippo = cli::denoise_horizon(trace.noisy, 64, BankKind::hippo, NoiseConfig{},
                                            Scheme::trapezoidal_lssl);
    const auto unhippo = cli::denoise_horizon(trace.noisy, 64, BankKind::unhippo, NoiseConfig{},
                                              Scheme::closed_form);
    if (mse(unhippo, trace.clean) < mse(hippo, trace.clean)) ++wins;
  }
  return {wins >= 18, "UnHiPPO wins " + std::to_string(wins) + "/20 (>= 18)"};
}

Outcome sigma_monotone() {
  const SignalTrace trace = cli::gp_trace(0);
  std::vector<double> r;
  for (double sigma2 : {1e6, 1e8, 1e10, 1e12}) {
    r.push_back(roughness(cli::denoise_horizon(trace.noisy, 64, BankKind::unhippo,
                                               NoiseConfig{sigma2, 1.0}, Scheme::closed_form)));
  }
  int inversions = 0;
  std::string values;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (i > 0 && r[i] > r[i - 1]) ++inversions;
    values += (i ? ", " : "") + sci(r[i]);
  }
  return {inversions <= 1,
          "roughness [" + values + "], " + std::to_string(inversions) + " inversions (<= 1)"};
}

Outcome recurrence_vs_conv() {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> state(1, 32), chans(1, 4);
  const std::size_t len = 1024;
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const Eigen::Index n = state(rng), m = chans(rng);
    Matrix a = testing::random_matrix(rng, n, n);
    // Spectral radius below one keeps the 1024-step outputs bounded.
    const double radius = a.eigenvalues().cwiseAbs().maxCoeff();
    a *= 0.95 / std::max(radius, 1e-12);
    const SsmCore core{a, testing::random_vector(rng, n), testing::random_matrix(rng, m, n),
                       testing::random_vector(rng, m)};
    std::vector<double> u(len);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (double& x : u) x = unif(rng);
    const Matrix y_rec = ssm_recurrence(core, u).y;
    const Matrix y_conv = krylov_conv(krylov_kernel(core, len), u, core.d);
    worst = std::max(worst, max_abs(y_rec - y_conv));
  }
  return {worst < 1e-8, "max deviation over 50 cores " + sci(worst) + " (< 1e-8)"};
}

Outcome bench_orderings() {
  const auto rows = cli::bench_disc(256, 21);
  double closed = 0, trap = 0, fastest_other = INFINITY, forward = 0;
  for (const auto& row : rows) {
    if (row.scheme == Scheme::closed_form) closed = row.median_ms;
    if (row.scheme == Scheme::trapezoidal) trap = row.median_ms;
    if (row.scheme == Scheme::forward) {
      forward = row.median_ms;
    } else {
      fastest_other = std::min(fastest_other, row.median_ms);
    }
  }
  const double ratio = closed / trap;
  return {forward < fastest_other && ratio < 10.0,
          "forward " + sci(forward) + " ms, next fastest " + sci(fastest_other) +
              " ms, closed/trapezoidal " + sci(ratio) + " (< 10)"};
}

Outcome polynomial_exactness() {
  const std::size_t n = 8;
  const HippoSystem sys = make_hippo(n);
  // Degree n - 1.
  const std::vector<double> coef{1.0, -2.0, 3.0, -1.0, 0.5, -0.7, 0.2, -0.4};
  const auto poly = [&](double x) {
    double v = 0.0;
    for (std::size_t i = coef.size(); i-- > 0;) v = v * x + coef[i];
    return v;
  };
  const std::size_t steps = 10000;
  const double dt = 1.0 / static_cast<double>(steps);
  Vector c = Vector::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t k = 1; k < steps; ++k) {
    const double t_k = dt * static_cast<double>(k);
    c = discretize_hippo(sys, Scheme::trapezoidal, t_k, dt).step(c, poly(t_k), poly(t_k + dt));
  }
  const Vector expected = cli::project_function(n, 1.0, 20001, poly);
  const double dev = max_abs(c - expected);
  return {dev < 1e-3, "max coefficient deviation " + sci(dev) + " (< 1e-3)"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> checks{
      {"hippo-identity", hippo_identity},
      {"basis-orthonormality", basis_orthonormality},
      {"kalman-oracle-equivalence", kalman_oracle},
      {"regrouped-pairs", regrouping},
      {"covariance-data-independence", covariance_independence},
      {"time-invariance-compression", compression},
      {"repeated-application-stability", stability},
      {"denoising-paired", denoising},
      {"sigma2-roughness-monotone", sigma_monotone},
      {"recurrence-convolution-equivalence", recurrence_vs_conv},
      {"discretization-timing-orderings", bench_orderings},
      {"polynomial-exactness", polynomial_exactness},
  };
  int failures = 0;
  for (const auto& [name, check] : checks) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}

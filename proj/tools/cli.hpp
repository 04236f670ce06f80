#pragma once

// Subcommands: gen-init, gen-trace, denoise, figures, bench-disc.
// Exit codes: 0 success, 1 numeric failure, 2 usage or validation error.

#include <cstdint>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "experiments.hpp"
#include "figures.hpp"

namespace unhippo::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumeric = 1;
inline constexpr int kExitUsage = 2;

inline std::uint64_t default_seed() {
  if (const char* env = std::getenv("UNHIPPO_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw InputError(std::string("UNHIPPO_SEED is not an unsigned integer: ") + env);
    }
  }
  return 0;
}

inline void print_kv(std::ostream& out, const KeyValues& kv) {
  for (const auto& [key, value] : kv) out << key << '=' << value << '\n';
}

struct GenInitOptions {
  std::string kind = "unhippo";
  std::size_t n = 128;
  std::size_t t_max = 1000;
  double sigma2 = 1e10;
  double process_scale = 1.0;
  std::string scheme;
  std::string out;
};

struct DenoiseOptions {
  std::string input;
  std::size_t n = 64;
  double sigma2 = 1e10;
  double process_scale = 1.0;
  std::string kind = "unhippo";
  std::string scheme;
  std::string out;
};

struct TraceOptions {
  std::size_t points = 250;
  double t_end = 10.0;
  double length_scale = 0.0;  // 0: t_end / 10
  double rho = 0.1;
  std::uint64_t seed = 0;
  std::string out;
};

struct FigureOptions {
  std::string which;
  std::string out;
  std::uint64_t seed = 0;
};

struct BenchOptions {
  std::size_t n = 256;
  std::size_t reps = 11;
};

namespace detail {

inline Scheme resolve_scheme(BankKind kind, const std::string& name) {
  if (name.empty()) return default_scheme(kind);
  const auto s = parse_scheme(name);
  if (!s) throw InputError("unknown scheme '" + name + "'");
  if (!scheme_valid_for(kind, *s)) {
    throw InputError(
        "scheme " + name + " is not available for kind " + std::string(to_string(kind)) +
        (kind == BankKind::hippo ? " (the closed form exists only for the data-free UnHiPPO dynamics)"
                                 : " (the LSSL trapezoid is a HiPPO-only input discretization)"));
  }
  return *s;
}

inline NoiseConfig checked_noise(double sigma2, double process_scale, std::ostream& err) {
  if (process_scale < kMinProcessScale) {
    err << "warning: process-scale " << process_scale << " is below " << kMinProcessScale
        << "; the predicted covariance would be numerically rank deficient\n";
    throw InputError("process-scale must be >= 1e-6");
  }
  const NoiseConfig noise{sigma2, process_scale};
  noise.validate();
  return noise;
}

}  // namespace detail

inline int cmd_gen_init(const GenInitOptions& o, std::ostream& out, std::ostream& err) {
  const BankKind kind = *parse_bank_kind(o.kind);
  const Scheme scheme = detail::resolve_scheme(kind, o.scheme);
  const NoiseConfig noise = kind == BankKind::unhippo
                                ? detail::checked_noise(o.sigma2, o.process_scale, err)
                                : NoiseConfig{};
  InitBank bank = build_init_bank(o.n, o.t_max, kind, noise, scheme);
  bank.provenance = std::string(kToolVersion) + " gen-init";
  write_bank(o.out, bank);
  out << "out=" << o.out << "\nkind=" << to_string(kind) << "\nscheme=" << to_string(scheme)
      << "\nn=" << o.n << "\nt_max=" << o.t_max << "\ntensors=" << 2 * o.t_max << '\n';
  return kExitOk;
}

inline int cmd_gen_trace(const TraceOptions& o, std::ostream& out) {
  const double ell = o.length_scale > 0.0 ? o.length_scale : o.t_end / 10.0;
  const SignalTrace trace = gp_trace(o.seed, o.rho, o.points, o.t_end, ell);
  write_trace_csv(o.out, trace);
  out << "out=" << o.out << "\npoints=" << trace.size() << "\nseed=" << o.seed
      << "\ngenerator=" << trace.generator << '\n';
  return kExitOk;
}

inline int cmd_denoise(const DenoiseOptions& o, std::ostream& out, std::ostream& err) {
  const BankKind kind = *parse_bank_kind(o.kind);
  const Scheme scheme = detail::resolve_scheme(kind, o.scheme);
  const NoiseConfig noise = kind == BankKind::unhippo
                                ? detail::checked_noise(o.sigma2, o.process_scale, err)
                                : NoiseConfig{};
  const SignalTrace trace = read_trace_csv(o.input);
  const std::vector<double> recon = denoise_horizon(trace.noisy, o.n, kind, noise, scheme);
  {
    std::ofstream csv(o.out);
    if (!csv) throw IoError("cannot open " + o.out + " for writing");
    csv << "tau,recon\n";
    for (std::size_t i = 0; i < recon.size(); ++i) {
      csv << format_double(trace.taus[i]) << ',' << format_double(recon[i]) << '\n';
    }
    if (!csv) throw IoError("write failed: " + o.out);
  }
  out << "mse_clean=" << format_double(mse(recon, trace.clean))
      << " mse_noisy=" << format_double(mse(recon, trace.noisy)) << '\n';
  return kExitOk;
}

inline int cmd_figures(const FigureOptions& o, std::ostream& out) {
  const auto kv = run_figure(o.which, o.out, o.seed);
  if (!kv) throw InputError("unknown figure '" + o.which + "'");
  out << "figure=" << o.which << '\n';
  print_kv(out, *kv);
  return kExitOk;
}

inline int cmd_bench_disc(const BenchOptions& o, std::ostream& out) {
  const auto rows = bench_disc(o.n, o.reps);
  out << "scheme          median_ms\n";
  for (const BenchRow& r : rows) {
    out << std::left << std::setw(16) << to_string(r.scheme) << std::fixed
        << std::setprecision(4) << r.median_ms << '\n';
  }
  out.unsetf(std::ios::floatfield);
  out << std::setprecision(6);
  for (const BenchRow& r : rows) {
    out << "time_ms_" << to_string(r.scheme) << '=' << r.median_ms << '\n';
  }
  out << "n=" << o.n << "\nreps=" << o.reps << '\n';
  return kExitOk;
}

/// Entry point shared by the executable and the tests.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"HiPPO / UnHiPPO initializations, denoising and figure data", "unhippo"};
  app.require_subcommand(1);
  std::function<int()> action;

  std::uint64_t seed = 0;
  try {
    seed = default_seed();
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  const std::vector<std::string> kinds{"hippo", "unhippo"};
  const std::vector<std::string> schemes{"forward", "backward", "trapezoidal",
                                         "trapezoidal_lssl", "closed_form"};

  GenInitOptions gi;
  auto* gen_init = app.add_subcommand("gen-init", "Tabulate (A_k, B_k) for k = 1..t-max");
  gen_init->add_option("--kind", gi.kind, "hippo or unhippo")->check(CLI::IsMember(kinds))
      ->capture_default_str();
  gen_init->add_option("--n", gi.n, "state size")->check(CLI::Range(1, kMaxDegree + 1))
      ->capture_default_str();
  gen_init->add_option("--t-max", gi.t_max, "number of steps")->check(CLI::PositiveNumber)
      ->capture_default_str();
  gen_init->add_option("--sigma2", gi.sigma2, "observation noise variance")
      ->check(CLI::PositiveNumber)->capture_default_str();
  gen_init->add_option("--process-scale", gi.process_scale, "process noise scale")
      ->capture_default_str();
  gen_init->add_option("--scheme", gi.scheme, "discretization (default per kind)")
      ->check(CLI::IsMember(schemes));
  gen_init->add_option("--out", gi.out, "output container")->required();
  gen_init->callback([&] { action = [&] { return cmd_gen_init(gi, out, err); }; });

  TraceOptions tr;
  auto* gen_trace = app.add_subcommand("gen-trace", "Sample a noisy GP trace to CSV");
  gen_trace->add_option("--points", tr.points)->check(CLI::Range(2, 1000000))->capture_default_str();
  gen_trace->add_option("--t-end", tr.t_end)->check(CLI::PositiveNumber)->capture_default_str();
  gen_trace->add_option("--length-scale", tr.length_scale, "default: t-end / 10")
      ->check(CLI::PositiveNumber);
  gen_trace->add_option("--rho", tr.rho, "noise standard deviation")
      ->check(CLI::NonNegativeNumber)->capture_default_str();
  gen_trace->add_option("--seed", tr.seed, "default: $UNHIPPO_SEED or 0");
  gen_trace->add_option("--out", tr.out)->required();
  gen_trace->callback([&] { action = [&] { return cmd_gen_trace(tr, out); }; });

  DenoiseOptions dn;
  auto* denoise = app.add_subcommand("denoise", "Online reconstruction of a trace's noisy column");
  denoise->add_option("--input", dn.input, "trace CSV (tau,clean,noisy)")->required();
  denoise->add_option("--n", dn.n)->check(CLI::Range(1, kMaxDegree + 1))->capture_default_str();
  denoise->add_option("--sigma2", dn.sigma2)->check(CLI::PositiveNumber)->capture_default_str();
  denoise->add_option("--process-scale", dn.process_scale)->capture_default_str();
  denoise->add_option("--kind", dn.kind)->check(CLI::IsMember(kinds))->capture_default_str();
  denoise->add_option("--scheme", dn.scheme)->check(CLI::IsMember(schemes));
  denoise->add_option("--out", dn.out, "reconstruction CSV (tau,recon)")->required();
  denoise->callback([&] { action = [&] { return cmd_denoise(dn, out, err); }; });

  FigureOptions fg;
  auto* figs = app.add_subcommand("figures", "Emit figure data as CSV + SVG");
  figs->add_option("--which", fg.which)->required()->check(CLI::IsMember(figure_names()));
  figs->add_option("--out", fg.out, "output directory")->required();
  figs->add_option("--seed", fg.seed, "default: $UNHIPPO_SEED or 0");
  figs->callback([&] { action = [&] { return cmd_figures(fg, out); }; });

  BenchOptions bn;
  auto* bench = app.add_subcommand("bench-disc", "Time one transition matrix per scheme");
  bench->add_option("--n", bn.n)->check(CLI::Range(1, kMaxDegree + 1))->capture_default_str();
  bench->add_option("--reps", bn.reps)->check(CLI::Range(1, 100000))->capture_default_str();
  bench->callback([&] { action = [&] { return cmd_bench_disc(bn, out); }; });

  tr.seed = seed;
  fg.seed = seed;
  try {
    std::vector<std::string> args;
    for (int i = argc - 1; i >= 1; --i) args.emplace_back(argv[i]);
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    return action();
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace unhippo::cli

#pragma once

// Synthetic test signals: Gaussian-process draws, additive Gaussian noise,
// and the error metrics used to score reconstructions.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "unhippo/errors.hpp"
#include "unhippo/matfun.hpp"

namespace unhippo {

/// Name recorded with every generated trace.
inline constexpr const char* kGeneratorName = "mt19937_64/box-muller";

/// Standard normal draws from std::mt19937_64 via Box-Muller. Both pieces
/// are fully specified, so streams are identical on every platform (unlike
/// std::normal_distribution).
class NormalSource {
 public:
  explicit NormalSource(std::uint64_t seed) : engine_(seed) {}

  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // 53-bit uniform in (0, 1].
    const double u1 =
        (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

struct SignalTrace {
  std::vector<double> taus;
  std::vector<double> clean;
  std::vector<double> noisy;
  double rho = 0.0;
  std::uint64_t seed = 0;
  std::string generator = kGeneratorName;

  std::size_t size() const noexcept { return taus.size(); }

  void validate() const {
    if (clean.size() != taus.size() || noisy.size() != taus.size()) {
      throw InputError("SignalTrace: column lengths differ");
    }
    for (std::size_t i = 1; i < taus.size(); ++i) {
      if (!(taus[i] > taus[i - 1])) {
        throw InputError("SignalTrace: taus must be strictly increasing");
      }
    }
  }
};

inline std::vector<double> equispaced(std::size_t count, double t_begin,
                                      double t_end) {
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = t_begin;
    return out;
  }
  const double step = (t_end - t_begin) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = t_begin + step * static_cast<double>(i);
  }
  out.back() = t_end;
  return out;
}

/// Zero-mean GP draw with kernel exp(-(tau - tau')^2 / (2 l^2)) on an
/// equispaced grid over [0, t_end]. The Cholesky factor gets 1e-9 diagonal
/// jitter, raised tenfold up to 1e-6 if the factorization fails. `noisy`
/// is a copy of `clean`.
inline SignalTrace sample_gp(std::size_t num_points, double t_end,
                             double length_scale, std::uint64_t seed) {
  if (num_points < 2) throw InputError("sample_gp: need at least 2 points");
  if (!(t_end > 0.0)) throw InputError("sample_gp: t_end must be positive");
  if (!(length_scale > 0.0)) {
    throw InputError("sample_gp: length_scale must be positive");
  }
  SignalTrace trace;
  trace.seed = seed;
  trace.taus = equispaced(num_points, 0.0, t_end);
  const auto size = static_cast<Eigen::Index>(num_points);
  Matrix kernel(size, size);
  for (Eigen::Index i = 0; i < size; ++i) {
    for (Eigen::Index j = 0; j < size; ++j) {
      const double d = trace.taus[static_cast<std::size_t>(i)] -
                       trace.taus[static_cast<std::size_t>(j)];
      kernel(i, j) = std::exp(-d * d / (2.0 * length_scale * length_scale));
    }
  }
  Matrix factor;
  bool ok = false;
  for (double jitter = 1e-9; jitter <= 1e-6 * (1.0 + 1e-9); jitter *= 10.0) {
    Eigen::LLT<Matrix> llt(kernel + jitter * Matrix::Identity(size, size));
    if (llt.info() == Eigen::Success) {
      factor = llt.matrixL();
      ok = true;
      break;
    }
  }
  if (!ok) throw NumericError("sample_gp: Cholesky failed with jitter up to 1e-6");
  NormalSource normal(seed);
  Vector z(size);
  for (Eigen::Index i = 0; i < size; ++i) z(i) = normal();
  const Vector values = factor.triangularView<Eigen::Lower>() * z;
  trace.clean.assign(values.data(), values.data() + size);
  trace.noisy = trace.clean;
  return trace;
}

/// noisy = clean + N(0, rho^2) i.i.d.
inline SignalTrace add_noise(SignalTrace trace, double rho, std::uint64_t seed) {
  if (!(rho >= 0.0) || !std::isfinite(rho)) {
    throw InputError("add_noise: rho must be >= 0");
  }
  trace.rho = rho;
  trace.noisy.resize(trace.clean.size());
  NormalSource normal(seed);
  for (std::size_t i = 0; i < trace.clean.size(); ++i) {
    const double delta = normal();
    trace.noisy[i] = rho == 0.0 ? trace.clean[i] : trace.clean[i] + rho * delta;
  }
  return trace;
}

inline double mse(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InputError("mse: length mismatch");
  if (a.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

/// Mean squared second difference.
inline double roughness(std::span<const double> values) {
  if (values.size() < 3) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 2; i < values.size(); ++i) {
    const double d2 = values[i] - 2.0 * values[i - 1] + values[i - 2];
    acc += d2 * d2;
  }
  return acc / static_cast<double>(values.size() - 2);
}

// ---- CSV --------------------------------------------------------------------

inline std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline void write_trace_csv(const std::string& path, const SignalTrace& trace) {
  trace.validate();
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "tau,clean,noisy\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    out << format_double(trace.taus[i]) << ',' << format_double(trace.clean[i])
        << ',' << format_double(trace.noisy[i]) << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

namespace detail {

inline double parse_csv_number(const std::string& field, std::size_t line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(field, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != field.size()) {
    throw FormatError("trace CSV line " + std::to_string(line) +
                      ": not a number: '" + field + "'");
  }
  return v;
}

}  // namespace detail

inline SignalTrace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("trace CSV is empty: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "tau,clean,noisy") {
    throw FormatError("trace CSV header must be 'tau,clean,noisy', got '" + line + "'");
  }
  SignalTrace trace;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 3) {
      throw FormatError("trace CSV line " + std::to_string(line_no) +
                        ": expected 3 fields");
    }
    trace.taus.push_back(detail::parse_csv_number(fields[0], line_no));
    trace.clean.push_back(detail::parse_csv_number(fields[1], line_no));
    trace.noisy.push_back(detail::parse_csv_number(fields[2], line_no));
  }
  if (trace.size() < 2) throw FormatError("trace CSV needs at least 2 rows");
  try {
    trace.validate();
  } catch (const InputError& e) {
    throw FormatError(std::string("trace CSV: ") + e.what());
  }
  return trace;
}

}  // namespace unhippo

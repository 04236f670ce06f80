#pragma once

// Inference-only linear state space layers:
//   c_k = A c_{k-1} + B u_k,   y_k = C c_k + D u_k
// evaluated either as a recurrence or as a causal convolution with the
// Krylov kernel K_j = C A^j B.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "unhippo/errors.hpp"
#include "unhippo/matfun.hpp"

namespace unhippo {

/// One single-input SSM with m output channels.
struct SsmCore {
  Matrix a;  // n x n
  Vector b;  // n
  Matrix c;  // m x n
  Vector d;  // m

  Eigen::Index state_size() const { return a.rows(); }
  Eigen::Index channels() const { return c.rows(); }

  void validate() const {
    const Eigen::Index n = a.rows();
    if (n == 0 || a.cols() != n || b.size() != n || c.cols() != n ||
        c.rows() == 0 || d.size() != c.rows()) {
      throw DimensionError("SsmCore: inconsistent dimensions");
    }
    if (!a.allFinite() || !b.allFinite() || !c.allFinite() || !d.allFinite()) {
      throw InputError("SsmCore: entries must be finite");
    }
  }
};

struct RecurrenceResult {
  Matrix y;  // L x m
  Vector c_final;
};

inline RecurrenceResult ssm_recurrence(const SsmCore& core,
                                       std::span<const double> u,
                                       const Vector& c0) {
  core.validate();
  if (u.empty()) throw InputError("ssm_recurrence: sequence must be non-empty");
  if (c0.size() != core.state_size()) {
    throw DimensionError("ssm_recurrence: initial state size mismatch");
  }
  const auto len = static_cast<Eigen::Index>(u.size());
  RecurrenceResult out{Matrix(len, core.channels()), c0};
  Vector next(c0.size());
  for (Eigen::Index k = 0; k < len; ++k) {
    const double uk = u[static_cast<std::size_t>(k)];
    next.noalias() = core.a * out.c_final;
    next += core.b * uk;
    if (!next.allFinite()) {
      throw NumericError("ssm_recurrence: state became non-finite",
                         static_cast<std::size_t>(k + 1));
    }
    out.c_final.swap(next);
    out.y.row(k) = (core.c * out.c_final + core.d * uk).transpose();
  }
  return out;
}

inline RecurrenceResult ssm_recurrence(const SsmCore& core,
                                       std::span<const double> u) {
  return ssm_recurrence(core, u, Vector::Zero(core.state_size()));
}

/// Rows K_j = (C A^j B)^T for j = 0..L-1, built by iterated multiplication
/// in double precision. With `narrow_to_f32` the finished kernel is rounded
/// to single precision (the convolution itself stays in double).
inline Matrix krylov_kernel(const SsmCore& core, std::size_t length,
                            bool narrow_to_f32 = false) {
  core.validate();
  if (length == 0) throw InputError("krylov_kernel: length must be >= 1");
  const auto len = static_cast<Eigen::Index>(length);
  Matrix kernel(len, core.channels());
  Vector power_b = core.b;
  Vector next(power_b.size());
  for (Eigen::Index j = 0; j < len; ++j) {
    kernel.row(j) = (core.c * power_b).transpose();
    if (!kernel.row(j).allFinite()) {
      throw NumericError("krylov_kernel: non-finite kernel entry at power " +
                         std::to_string(j));
    }
    next.noalias() = core.a * power_b;
    power_b.swap(next);
  }
  if (narrow_to_f32) {
    kernel = kernel.cast<float>().cast<double>();
  }
  return kernel;
}

/// y_k = sum_{j=0}^{k-1} K_j u_{k-j} + d u_k (1-based k); equals
/// ssm_recurrence with c0 = 0.
inline Matrix krylov_conv(const Matrix& kernel, std::span<const double> u,
                          const Vector& d) {
  const auto len = static_cast<Eigen::Index>(u.size());
  if (kernel.rows() != len) {
    std::ostringstream msg;
    msg << "krylov_conv: kernel length " << kernel.rows()
        << " does not match sequence length " << len;
    throw InputError(msg.str());
  }
  if (d.size() != kernel.cols()) {
    throw InputError("krylov_conv: feedthrough size does not match channels");
  }
  Matrix y(len, kernel.cols());
  for (Eigen::Index k = 0; k < len; ++k) {
    Eigen::RowVectorXd acc = d.transpose() * u[static_cast<std::size_t>(k)];
    for (Eigen::Index j = 0; j <= k; ++j) {
      acc += kernel.row(j) * u[static_cast<std::size_t>(k - j)];
    }
    y.row(k) = acc;
  }
  return y;
}

/// Exact GELU, x * Phi(x).
inline double gelu(double x) {
  return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2));
}

/// h stacked cores (one per input feature) followed by GELU and a
/// position-wise linear map from the flattened h*m channels back to h.
struct LsslLayer {
  std::vector<SsmCore> cores;
  Matrix mix_weights;  // (h*m) x h
  Vector mix_bias;     // h

  std::size_t features() const { return cores.size(); }

  void validate() const {
    if (cores.empty()) throw DimensionError("LsslLayer: no cores");
    const Eigen::Index n = cores.front().state_size();
    const Eigen::Index m = cores.front().channels();
    for (const SsmCore& core : cores) {
      core.validate();
      if (core.state_size() != n || core.channels() != m) {
        throw DimensionError("LsslLayer: cores must share n and m");
      }
    }
    const auto h = static_cast<Eigen::Index>(cores.size());
    if (mix_weights.rows() != h * m || mix_weights.cols() != h ||
        mix_bias.size() != h) {
      throw DimensionError("LsslLayer: mixing weights have the wrong shape");
    }
  }
};

/// u is L x h; returns L x h. Flattened channel index is feature * m + channel.
inline Matrix layer_forward(const LsslLayer& layer, const Matrix& u) {
  layer.validate();
  const auto h = static_cast<Eigen::Index>(layer.features());
  if (u.cols() != h) {
    throw DimensionError("layer_forward: input has " + std::to_string(u.cols()) +
                         " features, layer expects " + std::to_string(h));
  }
  if (u.rows() == 0) throw InputError("layer_forward: empty sequence");
  const Eigen::Index m = layer.cores.front().channels();
  const Eigen::Index len = u.rows();
  Matrix activated(len, h * m);
  std::vector<double> column(static_cast<std::size_t>(len));
  for (Eigen::Index f = 0; f < h; ++f) {
    for (Eigen::Index k = 0; k < len; ++k) column[static_cast<std::size_t>(k)] = u(k, f);
    const RecurrenceResult r = ssm_recurrence(layer.cores[static_cast<std::size_t>(f)], column);
    activated.middleCols(f * m, m) = r.y.unaryExpr([](double x) { return gelu(x); });
  }
  Matrix out = activated * layer.mix_weights;
  out.rowwise() += layer.mix_bias.transpose();
  return out;
}

}  // namespace unhippo

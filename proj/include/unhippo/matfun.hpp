#pragma once

// Dense matrix functions shared by the rest of the library. Everything is
// 64-bit and operates on Eigen's dynamic-size types.

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "unhippo/errors.hpp"

namespace unhippo {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline bool all_finite(const Eigen::Ref<const Matrix>& a) {
  return a.allFinite();
}

inline void require_finite(const Eigen::Ref<const Matrix>& a,
                           std::string_view what) {
  if (!a.allFinite()) {
    throw InputError(std::string(what) + ": entries must be finite");
  }
}

inline void require_square(const Eigen::Ref<const Matrix>& a,
                           std::string_view what) {
  if (a.rows() != a.cols()) {
    std::ostringstream msg;
    msg << what << ": expected a square matrix, got " << a.rows() << "x"
        << a.cols();
    throw DimensionError(msg.str());
  }
}

/// Largest L1 operator norm accepted by expm. Beyond this the result
/// overflows for matrices with positive spectrum, and the scaling step
/// needs more squarings than are numerically meaningful.
inline constexpr double kExpmNormBound = 700.0;

/// Matrix exponential by scaling and squaring with a degree-13 Pade
/// approximant (Eigen's implementation of Higham 2005).
inline Matrix expm(const Matrix& a) {
  require_square(a, "expm");
  require_finite(a, "expm");
  const double norm = a.cwiseAbs().colwise().sum().maxCoeff();
  Matrix result = a.exp();
  if (!result.allFinite()) {
    std::ostringstream msg;
    msg << "expm: result overflowed (input L1 norm " << norm << ")";
    throw NumericError(msg.str());
  }
  return result;
}

/// Moore-Penrose pseudo-inverse via SVD. Singular values below
/// `rel_tol * sigma_max` are treated as zero.
inline Matrix pinv(const Matrix& a, double rel_tol = 1e-12) {
  require_finite(a, "pinv");
  if (!(rel_tol >= 0.0)) {
    throw InputError("pinv: rel_tol must be nonnegative");
  }
  if (a.size() == 0) {
    return Matrix::Zero(a.cols(), a.rows());
  }
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) {
    throw NumericError("pinv: SVD did not converge");
  }
  const Vector& sv = svd.singularValues();
  const double cutoff = rel_tol * (sv.size() > 0 ? sv(0) : 0.0);
  Vector inv_sv = Vector::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff && sv(i) > 0.0) inv_sv(i) = 1.0 / sv(i);
  }
  return svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose();
}

/// (p + p^T) / 2 with the lower triangle mirrored into the upper one, so
/// the result is symmetric bit for bit.
inline Matrix symmetrize(const Matrix& p) {
  require_square(p, "symmetrize");
  const Eigen::Index n = p.rows();
  Matrix out(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    out(j, j) = p(j, j);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double v = (p(i, j) + p(j, i)) / 2.0;
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return out;
}

/// Solves lhs * x = rhs with partial-pivoting LU. Rejects numerically
/// singular systems instead of returning garbage.
inline Matrix solve(const Matrix& lhs, const Matrix& rhs,
                    std::string_view what = "solve") {
  require_square(lhs, what);
  if (lhs.rows() != rhs.rows()) {
    throw DimensionError(std::string(what) + ": right-hand side row mismatch");
  }
  Eigen::PartialPivLU<Matrix> lu(lhs);
  const double rcond = lu.rcond();
  const bool zero_pivot = (lu.matrixLU().diagonal().array() == 0.0).any();
  if (zero_pivot || !(rcond > 1e3 * std::numeric_limits<double>::epsilon())) {
    std::ostringstream msg;
    msg << what << ": matrix is singular to working precision (rcond "
        << rcond << ")";
    throw NumericError(msg.str());
  }
  return lu.solve(rhs);
}

/// Largest absolute entry.
inline double max_abs(const Eigen::Ref<const Matrix>& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

}  // namespace unhippo

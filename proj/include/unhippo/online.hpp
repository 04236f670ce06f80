#pragma once

// Running tabulated recurrences c_k = A_k c_{k-1} + B_k y_k over a signal.

#include <cstddef>
#include <span>
#include <vector>

#include "unhippo/errors.hpp"
#include "unhippo/hippo.hpp"
#include "unhippo/kalman.hpp"
#include "unhippo/matfun.hpp"

namespace unhippo {

struct OnlineResult {
  /// b^T c_k after every step: the reconstruction evaluated at its horizon.
  std::vector<double> horizon;
  Vector c_final;
};

/// Time-varying run: step k uses the bank's pair k, starting from c_0 = 0.
inline OnlineResult run_bank(const InitBank& bank, std::span<const double> ys) {
  if (ys.size() > bank.pairs.size()) {
    throw InputError("run_bank: signal has " + std::to_string(ys.size()) +
                     " samples but the bank only covers " +
                     std::to_string(bank.pairs.size()) + " steps");
  }
  const Vector b = make_hippo(bank.n).b;
  OnlineResult out{{}, Vector::Zero(static_cast<Eigen::Index>(bank.n))};
  out.horizon.reserve(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const BankPair& p = bank.pairs[i];
    out.c_final = p.a_bar * out.c_final + p.b_bar * ys[i];
    if (!out.c_final.allFinite()) {
      throw NumericError("run_bank: state became non-finite", i + 1);
    }
    out.horizon.push_back(endpoint_value(b, out.c_final));
  }
  return out;
}

/// Time-invariant run: the same pair at every step.
inline OnlineResult run_fixed(const BankPair& pair, std::span<const double> ys,
                              const Vector& c0) {
  const Vector b = make_hippo(static_cast<std::size_t>(c0.size())).b;
  OnlineResult out{{}, c0};
  out.horizon.reserve(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) {
    out.c_final = pair.a_bar * out.c_final + pair.b_bar * ys[i];
    out.horizon.push_back(endpoint_value(b, out.c_final));
  }
  return out;
}

}  // namespace unhippo

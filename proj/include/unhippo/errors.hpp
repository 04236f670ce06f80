#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace unhippo {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid arguments: bad sizes, out-of-range parameters, unsorted samples.
class InputError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public InputError {
 public:
  using InputError::InputError;
};

/// Argument outside the mathematical domain of the operation (e.g. t <= 0).
class DomainError : public InputError {
 public:
  using InputError::InputError;
};

/// Floating-point failure: non-finite values, singular solves, lost
/// positive semi-definiteness. Carries the recurrence step when known.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what,
                        std::optional<std::size_t> step = std::nullopt)
      : Error(step ? what + " (step " + std::to_string(*step) + ")" : what),
        step_(step) {}

  std::optional<std::size_t> step() const noexcept { return step_; }

 private:
  std::optional<std::size_t> step_;
};

/// Malformed serialized data (containers, CSV traces).
class FormatError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace unhippo

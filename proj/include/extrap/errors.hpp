#ifndef EXTRAP_ERRORS_HPP
#define EXTRAP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace extrap {

/// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidInput : Error {
  using Error::Error;
};

struct ShapeMismatch : Error {
  using Error::Error;
};

struct NotPositiveDefinite : Error {
  using Error::Error;
};

struct Unsupported : Error {
  using Error::Error;
};

struct OrderTooLarge : Error {
  using Error::Error;
};

struct DegenerateCorrelation : Error {
  using Error::Error;
};

struct DegenerateDenominator : Error {
  using Error::Error;
};

struct SeparationViolated : Error {
  using Error::Error;
};

/// Thrown when a training loss becomes non-finite; carries the last epoch
/// that still had a finite loss.
struct DivergenceDetected : Error {
  int last_finite_epoch;
  DivergenceDetected(const std::string& what, int epoch)
      : Error(what), last_finite_epoch(epoch) {}
};

struct IoError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace extrap

#endif  // EXTRAP_ERRORS_HPP

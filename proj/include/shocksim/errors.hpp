#pragma once

#include <stdexcept>
#include <string>

namespace shocksim {

// Invalid or unresolvable configuration (missing certificate, bad law spec, ...).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Caller-supplied data violating a precondition.
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Iterative solver failure; carries the last residual.
struct NumericalError : std::runtime_error {
  NumericalError(const std::string& what, double residual)
      : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"),
        residual(residual) {}
  double residual;
};

// API used against its contract, e.g. coupling paths on different streams.
struct MisuseError : std::logic_error {
  using std::logic_error::logic_error;
};

// Two independent estimates of a stationary quantity disagree.
struct ErgodicityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace shocksim

#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shocksim/state.hpp"

namespace shocksim {

// Constants (kappa, rho, c_embed) of a polynomial forgetting bound
//   |T(t)w1 - T(t)w2|_W <= (kappa t + |w1 - w2|_W^(-1/rho))^(-rho),
// together with the operator norm of the embedding W -> V.
struct DecayCertificate {
  double kappa;
  double rho;
  double c_embed = 1.0;

  // Throws InputError unless all three constants are positive and finite.
  void validate() const;
};

// (kappa t + d0^(-1/rho))^(-rho), continuously extended by 0 at d0 = 0.
double decay_envelope(const DecayCertificate& cert, double t, double d0);

// A time-continuous contractive semigroup acting on StateVectors.
//
// Implementations must be safe to call concurrently: evolve() is const and
// touches no shared mutable state.
class Semigroup {
 public:
  virtual ~Semigroup() = default;

  virtual std::string id() const = 0;
  virtual StateVector evolve(double t, const StateVector& s) const = 0;

  virtual bool fixes_zero() const = 0;
  virtual std::optional<DecayCertificate> certificate() const = 0;

  // Canonical (V) norm of the space and the norm the certificate is stated in (W).
  virtual NormTag v_norm() const = 0;
  virtual NormTag w_norm() const { return v_norm(); }

  // Numerical slack for identity/contractivity checks.
  virtual double contract_tolerance() const = 0;

  virtual std::size_t dimension() const = 0;
  StateVector zero() const { return StateVector::zeros(dimension(), v_norm()); }
};

using SemigroupPtr = std::shared_ptr<const Semigroup>;

struct DecaySample {
  double t;
  StateVector s1;
  StateVector s2;
};

struct DecayCheckReport {
  double worst_margin_w = -1e300;  // max over samples of lhs - rhs, W-norm
  double worst_margin_v = -1e300;  // same inequality scaled by c_embed into V
  std::size_t worst_index = 0;
  std::size_t samples = 0;
  bool passed(double tol) const { return worst_margin_w <= tol; }
};

// Sampled falsification of the decay inequality.  Throws ConfigError when
// no certificate is given and the semigroup carries none.
DecayCheckReport check_decay_bound(const Semigroup& sg, std::span<const DecaySample> samples,
                                   std::optional<DecayCertificate> cert = std::nullopt);

struct TimeSample {
  double t;
  double f;
};

struct BoundOracleResult {
  bool passed;
  double worst_margin;  // max of f(t) - bound(t); <= 0 means the bound holds
  double tolerance;
};

// Checks f(t) <= (kappa t + f(0)^(-1/rho_tilde))^(-rho_tilde) at each sample,
// i.e. the conclusion of the differential inequality f' <= -kappa rho_tilde f^(1+1/rho_tilde).
// Samples must be sorted with t[0] = 0 and f >= 0.
BoundOracleResult polynomial_bound_oracle(std::span<const TimeSample> samples, double kappa,
                                          double rho_tilde, double tol = 1e-12);

// Property probes shared by all concrete semigroups.  Each returns the worst
// observed excess over the respective exact relation.
struct SemigroupProbe {
  double identity_error = 0.0;       // max |evolve(0,s) - s|
  double semigroup_law_error = 0.0;  // max |T(t)T(h)s - T(t+h)s|
  double contraction_excess = 0.0;   // max |T s1 - T s2| - |s1 - s2|
  double zero_drift = 0.0;           // max |T(t) 0|
};

SemigroupProbe probe_semigroup(const Semigroup& sg, std::span<const StateVector> states,
                               std::span<const double> times);

// Log-spaced times in [t_min, t_max] with 0 prepended.
std::vector<double> log_time_grid(double t_min, double t_max, std::size_t count);

}  // namespace shocksim

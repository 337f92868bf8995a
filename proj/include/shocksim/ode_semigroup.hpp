#pragma once

#include "shocksim/semigroup.hpp"

namespace shocksim {

struct OdeSemigroupParams {
  double rho = 1.0;
  void validate() const;
};

// sgn(v) (t + |v|^(-1/rho))^(-rho): the flow of y' = -rho y |y|^(1/rho).
double ode_evolve(const OdeSemigroupParams& params, double t, double v);

// kappa = 2^(-1/rho), same rho, C = 1 (W = V = R).
DecayCertificate ode_certificate(const OdeSemigroupParams& params);

// t^(-1/2) * integral_0^t (tau + 1)^(-rho) dtau in closed form.  This is the
// normalized centred integral of the unshocked process started at x = 1; it
// tends to 0 iff rho > 1/2.
double counterexample_statistic(double rho, double t);

class OdeSemigroup final : public Semigroup {
 public:
  explicit OdeSemigroup(OdeSemigroupParams params);

  std::string id() const override { return "ode"; }
  StateVector evolve(double t, const StateVector& s) const override;
  bool fixes_zero() const override { return true; }
  std::optional<DecayCertificate> certificate() const override { return ode_certificate(params_); }
  NormTag v_norm() const override { return NormTag::abs(); }
  double contract_tolerance() const override { return 1e-12; }
  std::size_t dimension() const override { return 1; }

  const OdeSemigroupParams& params() const { return params_; }

 private:
  OdeSemigroupParams params_;
};

}  // namespace shocksim

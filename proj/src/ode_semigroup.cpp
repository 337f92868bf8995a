#include "shocksim/ode_semigroup.hpp"

#include <cmath>

#include "shocksim/errors.hpp"

namespace shocksim {

void OdeSemigroupParams::validate() const {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw InputError("ode semigroup needs rho > 0");
}

double ode_evolve(const OdeSemigroupParams& params, double t, double v) {
  if (t < 0.0) throw InputError("ode_evolve: negative time");
  if (v == 0.0 || t == 0.0) return v;
  const double a = std::abs(v);
  const double rho = params.rho;
  double mag;
  if (a < 1e-100) {
    mag = a * std::pow(1.0 + t * std::pow(a, 1.0 / rho), -rho);
  } else {
    mag = std::pow(t + std::pow(a, -1.0 / rho), -rho);
  }
  return std::copysign(mag, v);
}

DecayCertificate ode_certificate(const OdeSemigroupParams& params) {
  params.validate();
  return {std::exp2(-1.0 / params.rho), params.rho, 1.0};
}

double counterexample_statistic(double rho, double t) {
  if (!(t > 0.0)) throw InputError("counterexample_statistic needs t > 0");
  if (!(rho > 0.0)) throw InputError("counterexample_statistic needs rho > 0");
  const double root_t = std::sqrt(t);
  if (rho == 1.0) return std::log1p(t) / root_t;
  // (t+1)^(1-rho) - 1 written via expm1 so rho near 1 keeps its precision.
  return std::expm1((1.0 - rho) * std::log1p(t)) / ((1.0 - rho) * root_t);
}

OdeSemigroup::OdeSemigroup(OdeSemigroupParams params) : params_(params) { params_.validate(); }

StateVector OdeSemigroup::evolve(double t, const StateVector& s) const {
  if (s.size() != 1) throw InputError("ode semigroup acts on scalars");
  return StateVector::scalar(ode_evolve(params_, t, s.value()));
}

}  // namespace shocksim

#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "shocksim/semigroup.hpp"

namespace shocksim {

// Cell-centred finite-volume grid on [0, length] for the weighted p-Laplacian
// with zero-flux boundaries.  Cell weights gamma_i > 0 are averaged onto the
// n - 1 interior faces by the harmonic mean.
class PLapGrid {
 public:
  PLapGrid(std::size_t n, double length, double p, std::vector<double> cell_weights,
           double q = 2.0);
  static PLapGrid uniform(std::size_t n, double length, double p, double gamma = 1.0,
                          double q = 2.0);

  std::size_t n() const { return n_; }
  double length() const { return length_; }
  double h() const { return length_ / static_cast<double>(n_); }
  double p() const { return p_; }
  double q() const { return q_; }
  std::span<const double> cell_weights() const { return cell_weights_; }
  std::span<const double> face_weights() const { return face_weights_; }

  NormTag l2() const { return NormTag::lq(2.0, h()); }
  NormTag lq() const { return NormTag::lq(q_, h()); }
  StateVector state(std::vector<double> values) const { return StateVector(std::move(values), lq()); }

 private:
  std::size_t n_;
  double length_;
  double p_;
  double q_;
  std::vector<double> cell_weights_;
  std::vector<double> face_weights_;
};

// Cell weights from breakpoints: values[k] applies on [breaks[k-1], breaks[k]).
std::vector<double> piecewise_cell_weights(std::size_t n, double length,
                                           std::span<const double> breaks,
                                           std::span<const double> values);

// (A_h u)_i = -(F_{i+1/2} - F_{i-1/2}) / h with F = gamma |D|^(p-2) D and
// D_{i+1/2} = (u_{i+1} - u_i) / h.  Rejects inputs whose mean exceeds 1e-10.
StateVector apply_operator(const PLapGrid& grid, const StateVector& u);

struct NewtonOptions {
  std::size_t max_iter = 60;
  double rel_tol = 1e-13;
  double jacobian_regularization = 1e-12;
};

// Backward Euler step: the w with w + dt A_h(w) = u, by damped Newton.
// Throws NumericalError if Newton stalls.
StateVector implicit_step(const PLapGrid& grid, const StateVector& u, double dt,
                          const NewtonOptions& opts = {});

// Composes implicit steps of size <= dt_max landing exactly on t.  A failed
// step is retried as two half steps.
StateVector plap_evolve(const PLapGrid& grid, double t, const StateVector& u, double dt_max,
                        const NewtonOptions& opts = {});

// Smallest nonzero eigenvalue of the discrete Neumann Laplacian on the grid.
double discrete_neumann_gap(const PLapGrid& grid);
// Discrete Poincare constant on mean-zero grid functions, gap^(-1/2).
double discrete_poincare_constant(const PLapGrid& grid);

// kappa = (p-2) 2^(2-p) (sum_f h gamma_f^(2/(2-p)))^((2-p)/2) C^(-p), rho = 1/(p-2),
// c_embed = |L2 -> Lq| = length^(1/q - 1/2).
DecayCertificate plap_certificate(const PLapGrid& grid);

// Same kappa with the continuum Poincare constant length/pi and integral of
// gamma over the whole interval; reported alongside the discrete value.
double continuum_kappa(const PLapGrid& grid);

// min over pairs of (|x|^(p-2)x - |y|^(p-2)y).(x - y) - 2^(2-p)|x - y|^p.
double vector_monotonicity_check(std::span<const std::pair<std::vector<double>, std::vector<double>>> pairs,
                                 double p);

// -2 sum_f h gamma_f (phi(Du) - phi(Dv)) (Du - Dv), phi(D) = |D|^(p-2) D: the
// time derivative of |u - v|^2_{L2} along the semi-discrete flow.
double energy_dissipation(const PLapGrid& grid, const StateVector& u, const StateVector& v);

struct EnergyDerivativeReport {
  double max_relative_error = 0.0;
  double max_rhs = -1e300;  // the dissipation must stay <= 0
  std::vector<double> finite_difference;
  std::vector<double> rhs;
};

// Compares a central finite difference of f(t) = |T(t)u - T(t)v|^2 along the
// numerical flows with energy_dissipation at each time in t_grid.
EnergyDerivativeReport energy_derivative_check(const PLapGrid& grid, const StateVector& u,
                                               const StateVector& v, std::span<const double> t_grid,
                                               double dt_max);

class PLaplacianSemigroup final : public Semigroup {
 public:
  PLaplacianSemigroup(PLapGrid grid, double dt_max, NewtonOptions opts = {});

  std::string id() const override { return "plaplacian"; }
  StateVector evolve(double t, const StateVector& s) const override;
  bool fixes_zero() const override { return true; }
  std::optional<DecayCertificate> certificate() const override { return cert_; }
  NormTag v_norm() const override { return grid_.lq(); }
  NormTag w_norm() const override { return grid_.l2(); }
  double contract_tolerance() const override { return 1e-9; }
  std::size_t dimension() const override { return grid_.n(); }

  const PLapGrid& grid() const { return grid_; }
  double dt_max() const { return dt_max_; }

 private:
  PLapGrid grid_;
  double dt_max_;
  NewtonOptions opts_;
  DecayCertificate cert_;
};

}  // namespace shocksim

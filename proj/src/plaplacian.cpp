#include "shocksim/plaplacian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "shocksim/errors.hpp"

namespace shocksim {

namespace {

constexpr double kMeanTolerance = 1e-10;

// |x|^e for e >= 0 with exact fast paths for the common exponents.
double abs_pow(double x, double e) {
  const double a = std::abs(x);
  if (e == 1.0) return a;
  if (e == 0.0) return 1.0;
  if (e == 0.5) return std::sqrt(a);
  if (e == 2.0) return a * a;
  return std::pow(a, e);
}

double phi(double d, double p) { return abs_pow(d, p - 2.0) * d; }

void check_mean_zero(const StateVector& u) {
  if (std::abs(u.mean()) > kMeanTolerance)
    throw InputError("p-Laplacian state must have zero mean (got " + std::to_string(u.mean()) + ")");
}

void check_size(const PLapGrid& grid, const StateVector& u) {
  if (u.size() != grid.n()) throw InputError("p-Laplacian state size does not match grid");
}

// Flux F_f on the n-1 interior faces.
void face_fluxes(const PLapGrid& grid, std::span<const double> u, std::vector<double>& flux) {
  const double inv_h = 1.0 / grid.h();
  const auto gamma = grid.face_weights();
  flux.resize(grid.n() - 1);
  for (std::size_t f = 0; f + 1 < grid.n(); ++f)
    flux[f] = gamma[f] * phi((u[f + 1] - u[f]) * inv_h, grid.p());
}

void divergence(const PLapGrid& grid, std::span<const double> flux, std::span<double> out) {
  const double inv_h = 1.0 / grid.h();
  const std::size_t n = grid.n();
  for (std::size_t i = 0; i < n; ++i) {
    const double right = i + 1 < n ? flux[i] : 0.0;
    const double left = i > 0 ? flux[i - 1] : 0.0;
    out[i] = -(right - left) * inv_h;
  }
}

double max_abs(std::span<const double> x) {
  double m = 0.0;
  for (double c : x) m = std::max(m, std::abs(c));
  return m;
}

double sum_sq(std::span<const double> x) {
  double s = 0.0;
  for (double c : x) s += c * c;
  return s;
}

// Solves the symmetric tridiagonal system (diag, off) x = rhs in place.
void solve_tridiagonal(std::vector<double>& diag, const std::vector<double>& off,
                       std::vector<double>& rhs) {
  const std::size_t n = diag.size();
  std::vector<double> c(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) {
      const double m = off[i - 1];
      diag[i] -= m * c[i - 1];
      rhs[i] -= m * rhs[i - 1];
    }
    if (i + 1 < n) c[i] = off[i] / diag[i];
    rhs[i] /= diag[i];
  }
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c[i] * rhs[i + 1];
}

class ImplicitSolver {
 public:
  ImplicitSolver(const PLapGrid& grid, std::span<const double> u, double dt, const NewtonOptions& opts)
      : grid_(grid), u_(u), dt_(dt), opts_(opts), n_(grid.n()) {
    flux_.resize(n_ - 1);
    div_.resize(n_);
  }

  // Residual w - u + dt A(w); returns the scale that round-off is relative to.
  double residual(std::span<const double> w, std::vector<double>& r) {
    face_fluxes(grid_, w, flux_);
    divergence(grid_, flux_, div_);
    r.resize(n_);
    double scale = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      r[i] = w[i] - u_[i] + dt_ * div_[i];
      scale = std::max({scale, std::abs(u_[i]), std::abs(w[i]), dt_ * std::abs(div_[i])});
    }
    return scale;
  }

  std::vector<double> solve() {
    std::vector<double> w(u_.begin(), u_.end());
    std::vector<double> r, r_trial, w_trial(n_), diag(n_), off(n_ - 1), step;
    double scale = residual(w, r);
    double rnorm = sum_sq(r);
    const double inv_h2 = 1.0 / (grid_.h() * grid_.h());
    const auto gamma = grid_.face_weights();
    const double p = grid_.p();

    for (std::size_t iter = 0; iter < opts_.max_iter; ++iter) {
      if (max_abs(r) <= opts_.rel_tol * scale || scale == 0.0) return w;

      // Jacobian I + dt K(w), K the weighted graph Laplacian with face
      // coefficients gamma phi'(D) / h^2.
      std::fill(diag.begin(), diag.end(), 1.0);
      for (std::size_t f = 0; f + 1 < n_; ++f) {
        const double d = (w[f + 1] - w[f]) / grid_.h();
        const double dphi =
            (p - 1.0) * abs_pow(std::abs(d) + opts_.jacobian_regularization, p - 2.0);
        const double a = dt_ * gamma[f] * dphi * inv_h2;
        diag[f] += a;
        diag[f + 1] += a;
        off[f] = -a;
      }
      step.assign(r.begin(), r.end());
      solve_tridiagonal(diag, off, step);

      double alpha = 1.0;
      bool accepted = false;
      while (alpha > 1e-12) {
        for (std::size_t i = 0; i < n_; ++i) w_trial[i] = w[i] - alpha * step[i];
        const double trial_scale = residual(w_trial, r_trial);
        const double trial_norm = sum_sq(r_trial);
        if (trial_norm <= (1.0 - 1e-4 * alpha) * rnorm) {
          w.swap(w_trial);
          r.swap(r_trial);
          rnorm = trial_norm;
          scale = trial_scale;
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) {
        // Round-off floor: nothing left to gain.
        if (max_abs(r) <= 1e4 * opts_.rel_tol * scale) return w;
        throw NumericalError("implicit p-Laplacian step: line search failed", max_abs(r));
      }
    }
    if (max_abs(r) <= opts_.rel_tol * scale) return w;
    throw NumericalError("implicit p-Laplacian step: Newton did not converge", max_abs(r));
  }

 private:
  const PLapGrid& grid_;
  std::span<const double> u_;
  double dt_;
  const NewtonOptions& opts_;
  std::size_t n_;
  std::vector<double> flux_;
  std::vector<double> div_;
};

StateVector evolve_interval(const PLapGrid& grid, double t, StateVector u, double dt_max,
                            const NewtonOptions& opts, int depth) {
  const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(t / dt_max - 1e-9)));
  const double dt = t / static_cast<double>(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    try {
      u = implicit_step(grid, u, dt, opts);
    } catch (const NumericalError&) {
      if (depth >= 20) throw;
      u = evolve_interval(grid, dt, std::move(u), dt / 2.0, opts, depth + 1);
    }
  }
  return u;
}

}  // namespace

PLapGrid::PLapGrid(std::size_t n, double length, double p, std::vector<double> cell_weights,
                   double q)
    : n_(n), length_(length), p_(p), q_(q), cell_weights_(std::move(cell_weights)) {
  if (n_ < 4) throw InputError("p-Laplacian grid needs at least 4 cells");
  if (!(length_ > 0.0) || !std::isfinite(length_)) throw InputError("grid length must be positive");
  if (!(p_ > 2.0) || !std::isfinite(p_)) throw InputError("p-Laplacian exponent must satisfy p > 2");
  if (!(q_ >= 1.0 && q_ <= 2.0)) throw InputError("ambient exponent q must lie in [1, 2]");
  if (cell_weights_.size() != n_) throw InputError("need one weight per cell");
  for (double g : cell_weights_)
    if (!(g > 0.0) || !std::isfinite(g)) throw InputError("weights must be positive and finite");
  face_weights_.resize(n_ - 1);
  for (std::size_t f = 0; f + 1 < n_; ++f) {
    const double a = cell_weights_[f], b = cell_weights_[f + 1];
    face_weights_[f] = 2.0 * a * b / (a + b);
  }
}

PLapGrid PLapGrid::uniform(std::size_t n, double length, double p, double gamma, double q) {
  return PLapGrid(n, length, p, std::vector<double>(n, gamma), q);
}

std::vector<double> piecewise_cell_weights(std::size_t n, double length,
                                           std::span<const double> breaks,
                                           std::span<const double> values) {
  if (values.size() != breaks.size() + 1)
    throw InputError("piecewise weights need one more value than breakpoints");
  std::vector<double> out(n);
  const double h = length / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = (static_cast<double>(i) + 0.5) * h;
    std::size_t k = 0;
    while (k < breaks.size() && x >= breaks[k]) ++k;
    out[i] = values[k];
  }
  return out;
}

StateVector apply_operator(const PLapGrid& grid, const StateVector& u) {
  check_size(grid, u);
  check_mean_zero(u);
  std::vector<double> flux;
  face_fluxes(grid, u.coords(), flux);
  std::vector<double> out(grid.n());
  divergence(grid, flux, out);
  return StateVector(std::move(out), u.tag());
}

StateVector implicit_step(const PLapGrid& grid, const StateVector& u, double dt,
                          const NewtonOptions& opts) {
  check_size(grid, u);
  if (!(dt > 0.0)) throw InputError("implicit step needs dt > 0");
  check_mean_zero(u);
  ImplicitSolver solver(grid, u.coords(), dt, opts);
  std::vector<double> w = solver.solve();
  // The exact resolvent conserves the mean; remove the round-off drift.
  const double drift = std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(w.size()) - u.mean();
  for (double& x : w) x -= drift;
  return StateVector(std::move(w), u.tag());
}

StateVector plap_evolve(const PLapGrid& grid, double t, const StateVector& u, double dt_max,
                        const NewtonOptions& opts) {
  if (t < 0.0) throw InputError("plap_evolve: negative time");
  if (!(dt_max > 0.0)) throw InputError("plap_evolve: dt_max must be positive");
  check_size(grid, u);
  check_mean_zero(u);
  if (t == 0.0) return u;
  return evolve_interval(grid, t, u, dt_max, opts, 0);
}

double discrete_neumann_gap(const PLapGrid& grid) {
  const double h = grid.h();
  const double s = std::sin(std::numbers::pi / (2.0 * static_cast<double>(grid.n())));
  return 4.0 * s * s / (h * h);
}

double discrete_poincare_constant(const PLapGrid& grid) {
  return 1.0 / std::sqrt(discrete_neumann_gap(grid));
}

namespace {

double kappa_from(double p, double weight_integral, double poincare) {
  return (p - 2.0) * std::pow(2.0, 2.0 - p) * std::pow(weight_integral, (2.0 - p) / 2.0) *
         std::pow(poincare, -p);
}

}  // namespace

DecayCertificate plap_certificate(const PLapGrid& grid) {
  const double p = grid.p();
  double weight_integral = 0.0;
  for (double g : grid.face_weights()) weight_integral += grid.h() * std::pow(g, 2.0 / (2.0 - p));
  DecayCertificate cert{kappa_from(p, weight_integral, discrete_poincare_constant(grid)),
                        1.0 / (p - 2.0), std::pow(grid.length(), 1.0 / grid.q() - 0.5)};
  cert.validate();
  return cert;
}

double continuum_kappa(const PLapGrid& grid) {
  const double p = grid.p();
  double weight_integral = 0.0;
  for (double g : grid.cell_weights()) weight_integral += grid.h() * std::pow(g, 2.0 / (2.0 - p));
  return kappa_from(p, weight_integral, grid.length() / std::numbers::pi);
}

double vector_monotonicity_check(
    std::span<const std::pair<std::vector<double>, std::vector<double>>> pairs, double p) {
  if (!(p > 2.0)) throw InputError("monotonicity check needs p > 2");
  double worst = 1e300;
  for (const auto& [x, y] : pairs) {
    if (x.size() != y.size()) throw InputError("monotonicity pair size mismatch");
    const double nx = std::sqrt(sum_sq(x)), ny = std::sqrt(sum_sq(y));
    const double sx = abs_pow(nx, p - 2.0), sy = abs_pow(ny, p - 2.0);
    double lhs = 0.0, diff2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - y[i];
      lhs += (sx * x[i] - sy * y[i]) * d;
      diff2 += d * d;
    }
    const double rhs = std::pow(2.0, 2.0 - p) * std::pow(std::sqrt(diff2), p);
    worst = std::min(worst, lhs - rhs);
  }
  return pairs.empty() ? 0.0 : worst;
}

double energy_dissipation(const PLapGrid& grid, const StateVector& u, const StateVector& v) {
  check_size(grid, u);
  check_size(grid, v);
  const double h = grid.h();
  const auto gamma = grid.face_weights();
  double acc = 0.0;
  for (std::size_t f = 0; f + 1 < grid.n(); ++f) {
    const double du = (u[f + 1] - u[f]) / h;
    const double dv = (v[f + 1] - v[f]) / h;
    acc += h * gamma[f] * (phi(du, grid.p()) - phi(dv, grid.p())) * (du - dv);
  }
  return -2.0 * acc;
}

EnergyDerivativeReport energy_derivative_check(const PLapGrid& grid, const StateVector& u,
                                               const StateVector& v, std::span<const double> t_grid,
                                               double dt_max) {
  EnergyDerivativeReport report;
  const double delta = 10.0 * dt_max;
  const NormTag l2 = grid.l2();
  auto f = [&](const StateVector& a, const StateVector& b) {
    const double d = distance(a, b, l2);
    return d * d;
  };
  StateVector cu = u, cv = v;
  double now = 0.0;
  for (double t : t_grid) {
    if (t - delta < now) throw InputError("energy check times must be increasing and spaced");
    cu = plap_evolve(grid, t - delta - now, cu, dt_max);
    cv = plap_evolve(grid, t - delta - now, cv, dt_max);
    const double f_minus = f(cu, cv);
    cu = plap_evolve(grid, delta, cu, dt_max);
    cv = plap_evolve(grid, delta, cv, dt_max);
    const double rhs = energy_dissipation(grid, cu, cv);
    const StateVector pu = plap_evolve(grid, delta, cu, dt_max);
    const StateVector pv = plap_evolve(grid, delta, cv, dt_max);
    const double fd = (f(pu, pv) - f_minus) / (2.0 * delta);
    now = t;
    report.finite_difference.push_back(fd);
    report.rhs.push_back(rhs);
    report.max_rhs = std::max(report.max_rhs, rhs);
    if (rhs != 0.0)
      report.max_relative_error = std::max(report.max_relative_error, std::abs(fd - rhs) / std::abs(rhs));
    else if (fd != 0.0)
      report.max_relative_error = std::numeric_limits<double>::infinity();
  }
  return report;
}

PLaplacianSemigroup::PLaplacianSemigroup(PLapGrid grid, double dt_max, NewtonOptions opts)
    : grid_(std::move(grid)), dt_max_(dt_max), opts_(opts), cert_(plap_certificate(grid_)) {
  if (!(dt_max_ > 0.0)) throw InputError("dt_max must be positive");
}

StateVector PLaplacianSemigroup::evolve(double t, const StateVector& s) const {
  return plap_evolve(grid_, t, s, dt_max_, opts_);
}

}  // namespace shocksim

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shocksim/model.hpp"

namespace shocksim {

// A Lipschitz observable psi on the state space.
class Functional {
 public:
  enum class Kind { VNorm, Coordinate };

  // |v|_V, Lipschitz constant 1.
  static Functional v_norm(NormTag tag);
  // v_i; Lipschitz constant 1 for scalars, h^(-1/q) on an Lq grid.
  static Functional coordinate(std::size_t index, NormTag tag);

  // clamp(psi, lo, hi): bounded with the same Lipschitz constant.
  Functional clipped(double lo, double hi) const;
  Functional shifted(double offset) const;

  double operator()(const StateVector& v) const;
  double lipschitz() const { return lipschitz_; }
  bool bounded() const { return clip_.has_value(); }
  std::string describe() const;

 private:
  Kind kind_ = Kind::VNorm;
  NormTag tag_;
  std::size_t index_ = 0;
  double lipschitz_ = 1.0;
  double offset_ = 0.0;
  std::optional<std::pair<double, double>> clip_;
};

struct Integral {
  double value = 0.0;     // Richardson-extrapolated
  double midpoint = 0.0;  // plain composite midpoint at step quad_dt
  std::size_t segments = 0;
  std::size_t refined_segments = 0;  // inter-jump pieces shorter than quad_dt
};

// Composite midpoint rule for the integral of psi(X(tau)) over [t0, t1],
// split at every jump so each piece has a smooth integrand.  The sums at
// steps h and h/2 are combined by one Richardson step.
Integral integrate_midpoint(ProcessPath& path, const Functional& psi, double t0, double t1,
                            double quad_dt);

// Adaptive Gauss-Kronrod on each inter-jump piece; used as a high-accuracy
// reference for closed-form semigroups.
double integrate_accurate(ProcessPath& path, const Functional& psi, double t0, double t1,
                          double rel_tol = 1e-12);

// (1/T) * integral_0^T psi(X(tau)) dtau.
double time_average(ProcessPath& path, const Functional& psi, double horizon, double quad_dt);

// min(1e-2 / theta, dt_max) for p-Laplacian models, 1e-2 / theta otherwise.
double default_quad_dt(const Model& model);

struct StationaryMeanOptions {
  double burn_in = 50.0;
  double horizon = 1e4;
  std::size_t replicas = 10000;
  std::size_t batches = 32;
  double quad_dt = 0.0;  // 0: default_quad_dt
  bool strict = false;   // throw ErgodicityError on disagreement
};

struct StationaryMean {
  double time_average;       // (a) long-run average after burn-in
  double time_average_se;    // batch-means standard error
  double ensemble_mean;      // (b) psi(X(burn_in)) averaged over replicas from 0
  double ensemble_se;
  double joint_half_width;   // 95% half-width of (a) - (b)
  bool consistent;
};

StationaryMean stationary_mean(const Model& model, const Functional& psi,
                               const StationaryMeanOptions& opts);

// Mean of independent replica time averages over [burn_in, burn_in + horizon];
// the high-precision pre-pass for the CLT centring constant.
struct MeanEstimate {
  double mean;
  double standard_error;
};
MeanEstimate replica_mean(const Model& model, const Functional& psi, double burn_in, double horizon,
                          std::size_t replicas, double quad_dt, const StateVector& initial);

struct ForgettingCheck {
  double average_x;
  double average_y;
  double difference;
  double bound;           // L (1/T) [ |x-y| min(1,T) + integral_1^T C kappa^-rho tau^-rho ]
  double quadrature_error;
  double ci_half_width;
  bool passed;
};

// Time averages from two initials on a common stream against the explicit
// forgetting bound.
ForgettingCheck initial_forgetting(const Model& model, const Functional& psi, const StateVector& x,
                                   const StateVector& y, double horizon, double quad_dt,
                                   std::size_t batches = 32);

struct Stabilization {
  double average_t;
  double average_2t;
  double ci_half_width;  // 95% batch-means half-width of average_t
  bool passed;
  std::vector<double> batch_averages;
};

// Average over [0, 2T] against the average over [0, T] on one path.
Stabilization slln_stabilization(const Model& model, const Functional& psi, const StateVector& initial,
                                 double horizon, std::size_t batches, double quad_dt);

struct CltOptions {
  double horizon = 500.0;
  std::size_t replicas = 2000;
  double burn_in = 50.0;
  double quad_dt = 0.0;
  double psi_bar = 0.0;
  double psi_bar_se = 0.0;
  std::uint64_t stream_offset = 0;
  std::optional<StateVector> initial;  // default: zero
};

struct ErgodicReport {
  double horizon = 0.0;
  double time_average = 0.0;   // mean over replicas
  double reference_mean = 0.0;
  double reference_se = 0.0;
  std::vector<double> clt_samples;
  std::vector<double> replica_time_averages;
  std::vector<std::uint64_t> stream_ids;
  double sample_mean = 0.0;
  double sigma2_hat = 0.0;
  double sigma2_se = 0.0;
  double ks_distance = 0.0;    // studentized samples vs N(0, 1); NaN when degenerate
  double ks_p_value = 0.0;
  double centring_shift = 0.0; // 1.96 sqrt(T) reference_se / sigma_hat
  bool degenerate = false;
};

// S_r = T^(-1/2) (integral psi - T psi_bar) per replica, sigma^2 by the replica
// variance, and a KS normality check of S_r / sigma_hat.
ErgodicReport clt_experiment(const Model& model, const Functional& psi, const CltOptions& opts);

struct CkReport {
  double max_ks = 0.0;
  double critical_value = 0.0;
  bool passed = false;
  std::vector<double> direct;     // first functional, arm (a)
  std::vector<double> two_stage;  // first functional, arm (b)
};

// Law of psi(X_v(t + h)) directly versus via an intermediate restart at t with
// an independent stream; two-sample KS at the 1% level.
CkReport chapman_kolmogorov_test(const Model& model, const StateVector& v, double t, double h,
                                 std::span<const Functional> psis, std::size_t samples,
                                 double alpha = 0.01);

struct EPropertyReport {
  double worst_lipschitz_margin = -1e300;  // |psi(Xv) - psi(Xw)| - L |v - w|
  double worst_decay_margin = -1e300;      // same minus L C kappa^-rho t^-rho
  double worst_expectation_gap = 0.0;      // sup_t |Q(t)psi(v) - Q(t)psi(w)| / (L |v - w|)
  std::size_t comparisons = 0;
};

EPropertyReport e_property_test(const Model& model, const Functional& psi, const StateVector& v,
                                std::span<const StateVector> others, std::span<const double> t_grid,
                                std::size_t samples);

struct MomentReport {
  double mc_mean = 0.0;
  double mc_variance = 0.0;
  double theory_mean = 0.0;
  double theory_variance = 0.0;
  double rel_error_mean = 0.0;
  double rel_error_variance = 0.0;
  bool closed_form = true;  // false when the norm moments were sampled
};

// Compound Poisson moments of sum_{k <= N(t)} |eta_k| against theta t E|eta|
// and theta t E|eta|^2.
MomentReport compound_moment_check(const Model& model, double t, std::size_t samples);

// integral_1^T tau^(-rho) dtau.
double tail_power_integral(double horizon, double rho);

}  // namespace shocksim

#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "shocksim/poisson.hpp"
#include "shocksim/semigroup.hpp"

namespace shocksim {

// Replaces eta_m by a perturbed shock; used to couple paths whose noise differs.
using ShockOverride = std::function<StateVector(std::size_t m, const StateVector& eta)>;

// The process X_x(t) = T(t - alpha_N(t)) X_{x,N(t)} over the post-jump chain
// X_{x,m} = T(beta_m) X_{x,m-1} + eta_m.  Post-jump states are cached as they
// are reached.  Paths are right-continuous: at t = alpha_m the value is the
// post-jump state.
class ProcessPath {
 public:
  ProcessPath(SemigroupPtr semigroup, std::shared_ptr<ShockStream> stream, StateVector initial,
              ShockOverride shock_override = {});

  StateVector state_at(double t);
  // Post-jump state X_{x,m}.
  const StateVector& skeleton(std::size_t m);
  // The shock applied at jump m (after any override).
  StateVector shock(std::size_t m) const;

  const Semigroup& semigroup() const { return *semigroup_; }
  const SemigroupPtr& semigroup_ptr() const { return semigroup_; }
  ShockStream& stream() { return *stream_; }
  const std::shared_ptr<ShockStream>& stream_ptr() const { return stream_; }
  const StateVector& initial() const { return skeleton_.front(); }
  bool has_override() const { return static_cast<bool>(override_); }

 private:
  SemigroupPtr semigroup_;
  std::shared_ptr<ShockStream> stream_;
  ShockOverride override_;
  std::vector<StateVector> skeleton_;
};

// |X_x(t) - X^_x^(t)|_V for two paths on the same stream.  Throws MisuseError
// if the streams differ.
double coupled_distance(ProcessPath& a, ProcessPath& b, double t);

// |x - x^|_V + sum_{k <= N(t)} |eta_k - eta^_k|_V, the pathwise continuity bound.
double continuity_bound(ProcessPath& a, ProcessPath& b, double t);

// Union of log-spaced times in (0, horizon] and, after each jump, offsets
// {1e-3, 1e-2, 1e-1, 1} times the mean gap.
std::vector<double> verification_grid(ShockStream& stream, double horizon,
                                      std::size_t global_points = 200);

struct BoundCheck {
  double worst_margin = -1e300;  // max(lhs - rhs); <= tol passes
  double worst_time = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
};

// |X_x(t)|_V <= C kappa^-rho (t - alpha_N(t))^-rho; times with zero residual
// life are skipped.  Throws ConfigError without certificate or zero fixing.
BoundCheck verify_norm_bound(ProcessPath& path, std::span<const double> t_grid);

// |X_x(t) - X_y(t)|_V <= C kappa^-rho t^-rho for t > 0 with identical noise.
BoundCheck verify_coupling_bound(ProcessPath& a, ProcessPath& b, std::span<const double> t_grid);

// coupled_distance <= continuity_bound along t_grid.
BoundCheck verify_continuity_bound(ProcessPath& a, ProcessPath& b, std::span<const double> t_grid);

}  // namespace shocksim

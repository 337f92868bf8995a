#include "shocksim/process.hpp"

#include <algorithm>
#include <cmath>

#include "shocksim/errors.hpp"

namespace shocksim {

ProcessPath::ProcessPath(SemigroupPtr semigroup, std::shared_ptr<ShockStream> stream,
                         StateVector initial, ShockOverride shock_override)
    : semigroup_(std::move(semigroup)), stream_(std::move(stream)), override_(std::move(shock_override)) {
  if (!semigroup_ || !stream_) throw MisuseError("process path needs a semigroup and a stream");
  if (initial.size() != semigroup_->dimension())
    throw ConfigError("initial state dimension does not match the semigroup");
  if (stream_->law().space().dim != semigroup_->dimension())
    throw ConfigError("shock dimension does not match the semigroup");
  skeleton_.push_back(std::move(initial));
}

StateVector ProcessPath::shock(std::size_t m) const {
  StateVector eta = stream_->sample_shock(m);
  if (override_) return override_(m, eta);
  return eta;
}

const StateVector& ProcessPath::skeleton(std::size_t m) {
  while (skeleton_.size() <= m) {
    const std::size_t k = skeleton_.size();
    StateVector next = semigroup_->evolve(stream_->gap(k), skeleton_.back());
    next += shock(k);
    skeleton_.push_back(std::move(next));
  }
  return skeleton_[m];
}

StateVector ProcessPath::state_at(double t) {
  if (t < 0.0) throw InputError("state_at: negative time");
  const std::size_t n = stream_->count_at(t);
  const double since = t - stream_->arrival(n);
  const StateVector& base = skeleton(n);
  if (since == 0.0) return base;
  return semigroup_->evolve(since, base);
}

namespace {

void require_shared(const ProcessPath& a, const ProcessPath& b) {
  if (a.stream_ptr() != b.stream_ptr())
    throw MisuseError("coupled paths must share one shock stream");
}

std::pair<double, double> scale_and_exponent(const Semigroup& sg) {
  const auto cert = sg.certificate();
  if (!cert) throw ConfigError("bound verification needs a decay certificate");
  if (!sg.fixes_zero()) throw ConfigError("bound verification needs T(t)0 = 0");
  return {cert->c_embed * std::pow(cert->kappa, -cert->rho), cert->rho};
}

void record(BoundCheck& out, double margin, double t) {
  ++out.checked;
  if (margin > out.worst_margin) {
    out.worst_margin = margin;
    out.worst_time = t;
  }
}

}  // namespace

double coupled_distance(ProcessPath& a, ProcessPath& b, double t) {
  require_shared(a, b);
  return distance(a.state_at(t), b.state_at(t), a.semigroup().v_norm());
}

double continuity_bound(ProcessPath& a, ProcessPath& b, double t) {
  require_shared(a, b);
  const NormTag v = a.semigroup().v_norm();
  double bound = distance(a.initial(), b.initial(), v);
  const std::size_t n = a.stream().count_at(t);
  if (a.has_override() || b.has_override())
    for (std::size_t k = 1; k <= n; ++k) bound += distance(a.shock(k), b.shock(k), v);
  return bound;
}

std::vector<double> verification_grid(ShockStream& stream, double horizon, std::size_t global_points) {
  std::vector<double> grid;
  const double mean_gap = 1.0 / stream.theta();
  const double t_min = std::min(1e-3 * mean_gap, horizon);
  if (global_points > 1) {
    const double a = std::log(t_min), b = std::log(horizon);
    for (std::size_t i = 0; i < global_points; ++i)
      grid.push_back(std::min(
          horizon, std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(global_points - 1))));
  } else {
    grid.push_back(horizon);
  }
  for (double alpha : stream.arrivals_until(horizon)) {
    for (double off : {1e-3, 1e-2, 1e-1, 1.0}) {
      const double t = alpha + off * mean_gap;
      if (t <= horizon) grid.push_back(t);
    }
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

BoundCheck verify_norm_bound(ProcessPath& path, std::span<const double> t_grid) {
  const auto [scale, rho] = scale_and_exponent(path.semigroup());
  const NormTag v = path.semigroup().v_norm();
  BoundCheck out;
  for (double t : t_grid) {
    const double since = path.stream().residual_life(t);
    if (since <= 0.0) {
      ++out.skipped;
      continue;
    }
    record(out, norm(path.state_at(t), v) - scale * std::pow(since, -rho), t);
  }
  return out;
}

BoundCheck verify_coupling_bound(ProcessPath& a, ProcessPath& b, std::span<const double> t_grid) {
  require_shared(a, b);
  if (a.has_override() || b.has_override())
    throw MisuseError("coupling bound needs identical shocks on both paths");
  const auto [scale, rho] = scale_and_exponent(a.semigroup());
  BoundCheck out;
  for (double t : t_grid) {
    if (t <= 0.0) {
      ++out.skipped;
      continue;
    }
    record(out, coupled_distance(a, b, t) - scale * std::pow(t, -rho), t);
  }
  return out;
}

BoundCheck verify_continuity_bound(ProcessPath& a, ProcessPath& b, std::span<const double> t_grid) {
  BoundCheck out;
  for (double t : t_grid) record(out, coupled_distance(a, b, t) - continuity_bound(a, b, t), t);
  return out;
}

}  // namespace shocksim

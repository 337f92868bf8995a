#include "shocksim/semigroup.hpp"

#include <algorithm>
#include <cmath>

#include "shocksim/errors.hpp"

namespace shocksim {

void DecayCertificate::validate() const {
  auto positive = [](double x) { return std::isfinite(x) && x > 0.0; };
  if (!positive(kappa) || !positive(rho) || !positive(c_embed))
    throw InputError("decay certificate constants must be positive and finite");
}

double decay_envelope(const DecayCertificate& cert, double t, double d0) {
  if (d0 <= 0.0) return 0.0;
  if (t <= 0.0) return d0;
  if (d0 >= 1.0) return std::pow(cert.kappa * t + std::pow(d0, -1.0 / cert.rho), -cert.rho);
  // Equivalent form d0 (1 + kappa t d0^(1/rho))^(-rho) avoids overflow of d0^(-1/rho).
  const double scaled = cert.kappa * t * std::pow(d0, 1.0 / cert.rho);
  return d0 * std::pow(1.0 + scaled, -cert.rho);
}

DecayCheckReport check_decay_bound(const Semigroup& sg, std::span<const DecaySample> samples,
                                   std::optional<DecayCertificate> cert) {
  if (!cert) cert = sg.certificate();
  if (!cert) throw ConfigError("decay check on semigroup '" + sg.id() + "' without certificate");
  cert->validate();

  const NormTag w = sg.w_norm();
  DecayCheckReport report;
  report.samples = samples.size();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& smp = samples[i];
    const double lhs = distance(sg.evolve(smp.t, smp.s1), sg.evolve(smp.t, smp.s2), w);
    const double rhs = decay_envelope(*cert, smp.t, distance(smp.s1, smp.s2, w));
    const double margin = lhs - rhs;
    if (margin > report.worst_margin_w) {
      report.worst_margin_w = margin;
      report.worst_index = i;
    }
    report.worst_margin_v = std::max(report.worst_margin_v, cert->c_embed * margin);
  }
  return report;
}

BoundOracleResult polynomial_bound_oracle(std::span<const TimeSample> samples, double kappa,
                                          double rho_tilde, double tol) {
  if (samples.empty() || samples.front().t != 0.0)
    throw InputError("bound oracle needs a sample at t = 0");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].f < 0.0 || !std::isfinite(samples[i].f))
      throw InputError("bound oracle samples must be finite and nonnegative");
    if (i > 0 && samples[i].t < samples[i - 1].t)
      throw InputError("bound oracle samples must be sorted by time");
  }
  const DecayCertificate cert{kappa, rho_tilde, 1.0};
  cert.validate();
  const double f0 = samples.front().f;
  double worst = -1e300;
  for (const auto& s : samples) worst = std::max(worst, s.f - decay_envelope(cert, s.t, f0));
  return {worst <= tol, worst, tol};
}

SemigroupProbe probe_semigroup(const Semigroup& sg, std::span<const StateVector> states,
                               std::span<const double> times) {
  SemigroupProbe out;
  const NormTag v = sg.v_norm();
  const StateVector zero = sg.zero();
  for (double t : times) out.zero_drift = std::max(out.zero_drift, norm(sg.evolve(t, zero), v));
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto& s = states[i];
    out.identity_error = std::max(out.identity_error, distance(sg.evolve(0.0, s), s, v));
    const auto& other = states[(i + 1) % states.size()];
    const double t = times[i % times.size()];
    const double h = times[(i * 7 + 3) % times.size()];
    const StateVector a = sg.evolve(t, sg.evolve(h, s));
    const StateVector b = sg.evolve(t + h, s);
    out.semigroup_law_error = std::max(out.semigroup_law_error, distance(a, b, v));
    const double d_after = distance(sg.evolve(t, s), sg.evolve(t, other), v);
    out.contraction_excess = std::max(out.contraction_excess, d_after - distance(s, other, v));
  }
  return out;
}

std::vector<double> log_time_grid(double t_min, double t_max, std::size_t count) {
  std::vector<double> grid{0.0};
  if (count == 0) return grid;
  if (count == 1) {
    grid.push_back(t_max);
    return grid;
  }
  const double a = std::log(t_min), b = std::log(t_max);
  for (std::size_t i = 0; i < count; ++i)
    grid.push_back(std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1)));
  return grid;
}

}  // namespace shocksim

#include "shocksim/ergodic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "shocksim/errors.hpp"
#include "shocksim/parallel.hpp"
#include "shocksim/plaplacian.hpp"
#include "shocksim/stats.hpp"

namespace shocksim {

Functional Functional::v_norm(NormTag tag) {
  Functional f;
  f.kind_ = Kind::VNorm;
  f.tag_ = tag;
  f.lipschitz_ = 1.0;
  return f;
}

Functional Functional::coordinate(std::size_t index, NormTag tag) {
  Functional f;
  f.kind_ = Kind::Coordinate;
  f.tag_ = tag;
  f.index_ = index;
  // |v_i| <= max|v| <= h^(-1/q) |v|_q on a grid.
  f.lipschitz_ = tag.kind == NormTag::Kind::Abs ? 1.0 : std::pow(tag.h, -1.0 / tag.q);
  return f;
}

Functional Functional::clipped(double lo, double hi) const {
  if (!(lo < hi)) throw InputError("clip bounds must satisfy lo < hi");
  Functional f = *this;
  f.clip_ = {lo, hi};
  return f;
}

Functional Functional::shifted(double offset) const {
  Functional f = *this;
  f.offset_ += offset;
  return f;
}

double Functional::operator()(const StateVector& v) const {
  double value = kind_ == Kind::VNorm ? norm(v, tag_) : v[index_];
  if (clip_) value = std::clamp(value, clip_->first, clip_->second);
  return value + offset_;
}

std::string Functional::describe() const {
  std::string s = kind_ == Kind::VNorm ? "v-norm" : "coordinate[" + std::to_string(index_) + "]";
  if (clip_) s += " clipped";
  return s;
}

Integral integrate_midpoint(ProcessPath& path, const Functional& psi, double t0, double t1,
                            double quad_dt) {
  if (!(t1 >= t0) || t0 < 0.0) throw InputError("integration window must satisfy 0 <= t0 <= t1");
  if (!(quad_dt > 0.0)) throw InputError("quadrature step must be positive");
  Integral out;
  const Semigroup& sg = path.semigroup();
  ShockStream& stream = path.stream();
  std::size_t m = stream.count_at(t0);
  StateVector state = path.state_at(t0);
  double now = t0;
  double acc = 0.0;
  while (now < t1) {
    const double next_jump = stream.arrival(m + 1);
    const double end = std::min(next_jump, t1);
    const double len = end - now;
    const auto pieces = static_cast<std::size_t>(std::max(1.0, std::ceil(len / quad_dt - 1e-9)));
    if (len < quad_dt) ++out.refined_segments;
    const double w = len / static_cast<double>(pieces);
    // March in quarter steps so the h and h/2 midpoint sums share one
    // numerical path; the state is at the left edge of sub-interval j.
    double coarse_sum = 0.0, fine_sum = 0.0;
    for (std::size_t j = 0; j < pieces; ++j) {
      StateVector q1 = sg.evolve(0.25 * w, state);
      StateVector mid = sg.evolve(0.25 * w, q1);
      StateVector q3 = sg.evolve(0.25 * w, mid);
      coarse_sum += psi(mid);
      fine_sum += psi(q1) + psi(q3);
      if (j + 1 < pieces) state = sg.evolve(0.25 * w, q3);
    }
    const double coarse = w * coarse_sum, fine = 0.5 * w * fine_sum;
    out.midpoint += coarse;
    acc += (4.0 * fine - coarse) / 3.0;
    ++out.segments;
    now = end;
    if (end == next_jump && end < t1) {
      ++m;
      state = path.skeleton(m);
    } else if (end == next_jump) {
      ++m;
    }
  }
  out.value = acc;
  return out;
}

double integrate_accurate(ProcessPath& path, const Functional& psi, double t0, double t1,
                          double rel_tol) {
  using boost::math::quadrature::gauss_kronrod;
  ShockStream& stream = path.stream();
  std::size_t m = stream.count_at(t0);
  double now = t0;
  double acc = 0.0;
  while (now < t1) {
    const double end = std::min(stream.arrival(m + 1), t1);
    const StateVector& base = path.skeleton(m);
    const double start = stream.arrival(m);
    auto f = [&](double tau) { return psi(path.semigroup().evolve(tau - start, base)); };
    acc += gauss_kronrod<double, 31>::integrate(f, now, end, 12, rel_tol);
    now = end;
    ++m;
  }
  return acc;
}

double time_average(ProcessPath& path, const Functional& psi, double horizon, double quad_dt) {
  if (!(horizon > 0.0)) throw InputError("time average needs T > 0");
  return integrate_midpoint(path, psi, 0.0, horizon, quad_dt).value / horizon;
}

double default_quad_dt(const Model& model) {
  const double base = 1e-2 / model.theta;
  if (const auto* plap = dynamic_cast<const PLaplacianSemigroup*>(model.semigroup.get()))
    return std::min(base, plap->dt_max());
  return base;
}

namespace {

double resolve_quad_dt(const Model& model, double requested) {
  return requested > 0.0 ? requested : default_quad_dt(model);
}

std::vector<double> batch_averages(ProcessPath& path, const Functional& psi, double t0,
                                   double horizon, std::size_t batches, double quad_dt) {
  std::vector<double> out(batches);
  const double len = horizon / static_cast<double>(batches);
  for (std::size_t b = 0; b < batches; ++b) {
    const double a = t0 + len * static_cast<double>(b);
    out[b] = integrate_midpoint(path, psi, a, a + len, quad_dt).value / len;
  }
  return out;
}

}  // namespace

StationaryMean stationary_mean(const Model& model, const Functional& psi,
                               const StationaryMeanOptions& opts) {
  if (opts.burn_in < 10.0 / model.theta) throw InputError("burn-in must be at least 10 / theta");
  if (opts.replicas < 2) throw InputError("stationary mean needs at least two replicas");
  const double quad_dt = resolve_quad_dt(model, opts.quad_dt);
  const StateVector zero = model.zero();

  ProcessPath long_path = model.path(StreamFamily::Slln, 0, zero);
  const auto batches = batch_averages(long_path, psi, opts.burn_in, opts.horizon, opts.batches, quad_dt);
  const auto bm = stats::batch_means(batches);

  std::vector<double> terminal(opts.replicas);
  parallel_for(opts.replicas, [&](std::size_t r) {
    ProcessPath p = model.path(StreamFamily::Ensemble, r, zero);
    terminal[r] = psi(p.state_at(opts.burn_in));
  });
  const double ens_mean = stats::mean(terminal);
  const double ens_se = std::sqrt(stats::variance(terminal) / static_cast<double>(terminal.size()));

  StationaryMean out{bm.mean, bm.standard_error, ens_mean, ens_se,
                     stats::kZ95 * std::hypot(bm.standard_error, ens_se), false};
  out.consistent = std::abs(out.time_average - out.ensemble_mean) <= out.joint_half_width;
  if (opts.strict && !out.consistent)
    throw ErgodicityError("time average and ensemble estimate disagree beyond their joint CI");
  return out;
}

MeanEstimate replica_mean(const Model& model, const Functional& psi, double burn_in, double horizon,
                          std::size_t replicas, double quad_dt, const StateVector& initial) {
  if (replicas < 2) throw InputError("replica mean needs at least two replicas");
  quad_dt = resolve_quad_dt(model, quad_dt);
  std::vector<double> averages(replicas);
  parallel_for(replicas, [&](std::size_t r) {
    ProcessPath p = model.path(StreamFamily::PrePass, r, initial);
    averages[r] = integrate_midpoint(p, psi, burn_in, burn_in + horizon, quad_dt).value / horizon;
  });
  return {stats::mean(averages),
          std::sqrt(stats::variance(averages) / static_cast<double>(replicas))};
}

double tail_power_integral(double horizon, double rho) {
  if (horizon <= 1.0) return 0.0;
  if (rho == 1.0) return std::log(horizon);
  return std::expm1((1.0 - rho) * std::log(horizon)) / (1.0 - rho);
}

ForgettingCheck initial_forgetting(const Model& model, const Functional& psi, const StateVector& x,
                                   const StateVector& y, double horizon, double quad_dt,
                                   std::size_t batches) {
  const auto cert = model.semigroup->certificate();
  if (!cert) throw ConfigError("forgetting bound needs a decay certificate");
  quad_dt = resolve_quad_dt(model, quad_dt);
  auto stream = model.stream(StreamFamily::Path, 0);
  ProcessPath px(model.semigroup, stream, x);
  ProcessPath py(model.semigroup, stream, y);

  const auto bx = batch_averages(px, psi, 0.0, horizon, batches, quad_dt);
  const auto by = batch_averages(py, psi, 0.0, horizon, batches, quad_dt);
  const double ax = stats::mean(bx), ay = stats::mean(by);

  // Quadrature error by step halving on both paths.
  const double fine_x = integrate_midpoint(px, psi, 0.0, horizon, 0.5 * quad_dt).value / horizon;
  const double fine_y = integrate_midpoint(py, psi, 0.0, horizon, 0.5 * quad_dt).value / horizon;
  const double quad_err = std::abs(fine_x - ax) + std::abs(fine_y - ay);

  const double dist = distance(x, y, model.semigroup->v_norm());
  const double scale = cert->c_embed * std::pow(cert->kappa, -cert->rho);
  const double bound = psi.lipschitz() / horizon *
                       (dist * std::min(1.0, horizon) + scale * tail_power_integral(horizon, cert->rho));
  const double ci = stats::kZ95 * std::hypot(stats::batch_means(bx).standard_error,
                                             stats::batch_means(by).standard_error);
  const double diff = std::abs(ax - ay);
  return {ax, ay, diff, bound, quad_err, ci, diff <= bound + quad_err + ci};
}

Stabilization slln_stabilization(const Model& model, const Functional& psi, const StateVector& initial,
                                 double horizon, std::size_t batches, double quad_dt) {
  if (batches < 2) throw InputError("stabilization check needs at least two batches");
  quad_dt = resolve_quad_dt(model, quad_dt);
  ProcessPath path = model.path(StreamFamily::Slln, 0, initial);
  Stabilization out;
  out.batch_averages = batch_averages(path, psi, 0.0, 2.0 * horizon, 2 * batches, quad_dt);
  const std::span<const double> all(out.batch_averages);
  const auto first = stats::batch_means(all.first(batches));
  out.average_t = first.mean;
  out.average_2t = stats::mean(all);
  out.ci_half_width = stats::kZ95 * first.standard_error;
  out.passed = std::abs(out.average_2t - out.average_t) <= out.ci_half_width;
  return out;
}

ErgodicReport clt_experiment(const Model& model, const Functional& psi, const CltOptions& opts) {
  if (!(opts.horizon > 0.0)) throw InputError("CLT horizon must be positive");
  if (opts.replicas < 2) throw InputError("CLT experiment needs at least two replicas");
  const double quad_dt = resolve_quad_dt(model, opts.quad_dt);
  const StateVector initial = opts.initial ? *opts.initial : model.zero();
  const double T = opts.horizon;

  ErgodicReport rep;
  rep.horizon = T;
  rep.reference_mean = opts.psi_bar;
  rep.reference_se = opts.psi_bar_se;
  rep.clt_samples.resize(opts.replicas);
  rep.replica_time_averages.resize(opts.replicas);
  rep.stream_ids.resize(opts.replicas);
  parallel_for(opts.replicas, [&](std::size_t r) {
    const std::uint64_t index = opts.stream_offset + r;
    ProcessPath p = model.path(StreamFamily::Clt, index, initial);
    const double integral =
        integrate_midpoint(p, psi, opts.burn_in, opts.burn_in + T, quad_dt).value;
    rep.stream_ids[r] = stream_id(StreamFamily::Clt, index);
    rep.replica_time_averages[r] = integral / T;
    rep.clt_samples[r] = (integral - T * opts.psi_bar) / std::sqrt(T);
  });
  rep.time_average = stats::mean(rep.replica_time_averages);
  rep.sample_mean = stats::mean(rep.clt_samples);
  rep.sigma2_hat = stats::variance(rep.clt_samples);
  rep.sigma2_se = stats::variance_standard_error(rep.clt_samples);
  // Replicas differ only by rounding when psi(X) is deterministic.
  double scale = 0.0;
  for (double x : rep.clt_samples) scale = std::max(scale, std::abs(x));
  rep.degenerate = !(std::sqrt(rep.sigma2_hat) > 1e-9 * scale) || rep.sigma2_hat == 0.0;
  if (rep.degenerate) {
    rep.ks_distance = std::numeric_limits<double>::quiet_NaN();
    rep.ks_p_value = std::numeric_limits<double>::quiet_NaN();
    return rep;
  }
  const double sigma = std::sqrt(rep.sigma2_hat);
  std::vector<double> studentized(rep.clt_samples.size());
  for (std::size_t i = 0; i < studentized.size(); ++i) studentized[i] = rep.clt_samples[i] / sigma;
  rep.ks_distance = stats::ks_one_sample(studentized, stats::normal_cdf);
  rep.ks_p_value = stats::kolmogorov_tail(std::sqrt(static_cast<double>(opts.replicas)) * rep.ks_distance);
  rep.centring_shift = stats::kZ95 * std::sqrt(T) * opts.psi_bar_se / sigma;
  return rep;
}

CkReport chapman_kolmogorov_test(const Model& model, const StateVector& v, double t, double h,
                                 std::span<const Functional> psis, std::size_t samples,
                                 double alpha) {
  if (!(t > 0.0) || h < 0.0) throw InputError("Chapman-Kolmogorov test needs t > 0, h >= 0");
  if (psis.empty()) throw InputError("Chapman-Kolmogorov test needs at least one functional");
  std::vector<StateVector> direct(samples), staged(samples);
  parallel_for(samples, [&](std::size_t i) {
    ProcessPath a = model.path(StreamFamily::CkDirect, i, v);
    direct[i] = a.state_at(t + h);
    ProcessPath first = model.path(StreamFamily::CkFirstStage, i, v);
    const StateVector mid = first.state_at(t);
    ProcessPath second = model.path(StreamFamily::CkSecondStage, i, mid);
    staged[i] = second.state_at(h);
  });
  CkReport rep;
  rep.critical_value = stats::ks_critical_two_sample(alpha, samples, samples);
  for (std::size_t k = 0; k < psis.size(); ++k) {
    std::vector<double> x(samples), y(samples);
    for (std::size_t i = 0; i < samples; ++i) {
      x[i] = psis[k](direct[i]);
      y[i] = psis[k](staged[i]);
    }
    rep.max_ks = std::max(rep.max_ks, stats::ks_two_sample(x, y, 1e-12));
    if (k == 0) {
      rep.direct = std::move(x);
      rep.two_stage = std::move(y);
    }
  }
  rep.passed = rep.max_ks < rep.critical_value;
  return rep;
}

EPropertyReport e_property_test(const Model& model, const Functional& psi, const StateVector& v,
                                std::span<const StateVector> others, std::span<const double> t_grid,
                                std::size_t samples) {
  if (!psi.bounded()) throw InputError("e-property test needs a bounded functional");
  const auto cert = model.semigroup->certificate();
  const NormTag vn = model.semigroup->v_norm();
  const double L = psi.lipschitz();
  EPropertyReport rep;
  for (std::size_t j = 0; j < others.size(); ++j) {
    const double dist = distance(v, others[j], vn);
    // Per-sample differences, kept per index for an ordered reduction.
    std::vector<std::vector<double>> diffs(samples, std::vector<double>(t_grid.size()));
    parallel_for(samples, [&](std::size_t i) {
      auto stream = model.stream(StreamFamily::EProperty, j * samples + i);
      ProcessPath a(model.semigroup, stream, v);
      ProcessPath b(model.semigroup, stream, others[j]);
      for (std::size_t k = 0; k < t_grid.size(); ++k)
        diffs[i][k] = psi(a.state_at(t_grid[k])) - psi(b.state_at(t_grid[k]));
    });
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
      const double t = t_grid[k];
      double mean_diff = 0.0;
      for (std::size_t i = 0; i < samples; ++i) {
        const double d = std::abs(diffs[i][k]);
        mean_diff += diffs[i][k];
        rep.worst_lipschitz_margin = std::max(rep.worst_lipschitz_margin, d - L * dist);
        if (cert && t > 0.0) {
          const double decay = L * cert->c_embed * std::pow(cert->kappa * t, -cert->rho);
          rep.worst_decay_margin = std::max(rep.worst_decay_margin, d - decay);
        }
        ++rep.comparisons;
      }
      mean_diff /= static_cast<double>(samples);
      if (dist > 0.0)
        rep.worst_expectation_gap = std::max(rep.worst_expectation_gap, std::abs(mean_diff) / (L * dist));
    }
  }
  return rep;
}

MomentReport compound_moment_check(const Model& model, double t, std::size_t samples) {
  if (!(t > 0.0)) throw InputError("moment check needs t > 0");
  std::vector<double> sums(samples);
  parallel_for(samples, [&](std::size_t i) {
    auto stream = model.stream(StreamFamily::Moments, i);
    const std::size_t n = stream->count_at(t);
    double s = 0.0;
    for (std::size_t k = 1; k <= n; ++k) s += norm(stream->sample_shock(k));
    sums[i] = s;
  });
  MomentReport rep;
  rep.mc_mean = stats::mean(sums);
  rep.mc_variance = stats::variance(sums);
  NormMoments moments{};
  if (auto closed = model.law->norm_moments()) {
    moments = *closed;
  } else {
    rep.closed_form = false;
    moments = sampled_norm_moments(*model.law, model.seed ^ 0x5eedf00dull, 1'000'000);
  }
  rep.theory_mean = model.theta * t * moments.first;
  rep.theory_variance = model.theta * t * moments.second;
  auto rel = [](double est, double exact) {
    if (exact == 0.0) return est == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return std::abs(est - exact) / std::abs(exact);
  };
  rep.rel_error_mean = rel(rep.mc_mean, rep.theory_mean);
  rep.rel_error_variance = rel(rep.mc_variance, rep.theory_variance);
  return rep;
}

}  // namespace shocksim

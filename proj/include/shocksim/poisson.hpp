#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "shocksim/shocks.hpp"

namespace shocksim {

// One realization of Poisson arrival times alpha_m (gaps ~ Exp(theta)) and
// i.i.d. shocks eta_m.  Gap m and shock m are pure functions of
// (seed, stream id, m) drawn from disjoint Philox families, so the stream can
// be rebuilt anywhere.  Arrivals are cached as they are first needed; an
// instance must not be shared across threads.
class ShockStream {
 public:
  static constexpr std::size_t kDefaultMaxJumps = 10'000'000;

  ShockStream(double theta, std::uint64_t seed, std::uint64_t stream_id, ShockLawPtr law,
              std::size_t max_jumps = kDefaultMaxJumps);

  double theta() const { return theta_; }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  const ShockLaw& law() const { return *law_; }
  const ShockLawPtr& law_ptr() const { return law_; }

  // alpha_m, alpha_0 = 0.
  double arrival(std::size_t m);
  // beta_m = alpha_m - alpha_{m-1}, m >= 1.
  double gap(std::size_t m);
  // N(t) = max{m : alpha_m <= t}.
  std::size_t count_at(double t);
  // t - alpha_{N(t)}.
  double residual_life(double t);
  // eta_m, m >= 1; identical on every call for the same (seed, stream, m).
  StateVector sample_shock(std::size_t m) const;

  // Arrival times alpha_1..alpha_N(t) in (0, t].
  std::vector<double> arrivals_until(double t);

  // Replaces beta_1..beta_k by the given gaps; later gaps stay random.  Only
  // valid before the stream has been read.
  void pin_gaps(std::vector<double> gaps);

 private:
  void extend_past(double t);
  double draw_gap(std::size_t m) const;

  double theta_;
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  ShockLawPtr law_;
  std::size_t max_jumps_;
  std::vector<double> arrivals_{0.0};
  std::vector<double> pinned_;
};

// sup over q of |P_emp(t - alpha_N(t) > q) - exp(-theta q) 1{q < t}| from
// `samples` independent streams.
struct ResidualLifeReport {
  double sup_error;
  double mass_beyond_t;  // empirical P(residual > t), must be 0
};
ResidualLifeReport residual_life_survival_error(double theta, double t, std::size_t samples,
                                                std::uint64_t seed);

}  // namespace shocksim

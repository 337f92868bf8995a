#include "shocksim/poisson.hpp"

#include <algorithm>
#include <cmath>

#include "shocksim/errors.hpp"

namespace shocksim {

ShockStream::ShockStream(double theta, std::uint64_t seed, std::uint64_t stream_id, ShockLawPtr law,
                         std::size_t max_jumps)
    : theta_(theta), seed_(seed), stream_id_(stream_id), law_(std::move(law)), max_jumps_(max_jumps) {
  if (!(theta_ > 0.0) || !std::isfinite(theta_)) throw ConfigError("theta must be positive");
  if (!law_) throw ConfigError("shock stream needs a shock law");
  if (stream_id_ > kStreamMask) throw ConfigError("stream id exceeds 56 bits");
}

double ShockStream::draw_gap(std::size_t m) const {
  if (m <= pinned_.size()) return pinned_[m - 1];
  CounterEngine engine(seed_, stream_id_, Purpose::Gap, static_cast<std::uint32_t>(m));
  // -ln(U)/theta with U in (0, 1]; U == 1 would give a zero gap, so redraw.
  for (;;) {
    const double g = -std::log(engine.uniform_open_closed()) / theta_;
    if (g > 0.0) return g;
  }
}

void ShockStream::extend_past(double t) {
  while (arrivals_.back() <= t) {
    const std::size_t m = arrivals_.size();
    if (m > max_jumps_)
      throw ConfigError("shock stream exceeded the jump limit (" + std::to_string(max_jumps_) + ")");
    arrivals_.push_back(arrivals_.back() + draw_gap(m));
  }
}

double ShockStream::arrival(std::size_t m) {
  while (arrivals_.size() <= m) {
    if (arrivals_.size() > max_jumps_)
      throw ConfigError("shock stream exceeded the jump limit (" + std::to_string(max_jumps_) + ")");
    arrivals_.push_back(arrivals_.back() + draw_gap(arrivals_.size()));
  }
  return arrivals_[m];
}

double ShockStream::gap(std::size_t m) {
  if (m == 0) throw InputError("gaps are indexed from 1");
  return arrival(m) - arrival(m - 1);
}

std::size_t ShockStream::count_at(double t) {
  if (t < 0.0) throw InputError("count_at: negative time");
  extend_past(t);
  const auto it = std::upper_bound(arrivals_.begin(), arrivals_.end(), t);
  return static_cast<std::size_t>(it - arrivals_.begin()) - 1;
}

double ShockStream::residual_life(double t) { return t - arrivals_[count_at(t)]; }

StateVector ShockStream::sample_shock(std::size_t m) const {
  if (m == 0) throw InputError("shocks are indexed from 1");
  CounterEngine engine(seed_, stream_id_, Purpose::Shock, static_cast<std::uint32_t>(m));
  return law_->sample(engine);
}

std::vector<double> ShockStream::arrivals_until(double t) {
  const std::size_t n = count_at(t);
  return {arrivals_.begin() + 1, arrivals_.begin() + static_cast<std::ptrdiff_t>(n) + 1};
}

void ShockStream::pin_gaps(std::vector<double> gaps) {
  if (arrivals_.size() > 1) throw MisuseError("pin_gaps after the stream was read");
  for (double g : gaps)
    if (!(g > 0.0) || !std::isfinite(g)) throw InputError("pinned gaps must be positive");
  pinned_ = std::move(gaps);
}

ResidualLifeReport residual_life_survival_error(double theta, double t, std::size_t samples,
                                                std::uint64_t seed) {
  auto law = std::make_shared<const ShockLaw>(ShockLawSpec{}, ShockSpace::scalar());
  std::vector<double> r(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    ShockStream stream(theta, seed, i, law);
    r[i] = stream.residual_life(t);
  }
  std::sort(r.begin(), r.end());
  const auto n = static_cast<double>(samples);
  auto survival = [&](double q) { return q < t ? std::exp(-theta * q) : 0.0; };
  auto survival_left = [&](double q) { return q <= t ? std::exp(-theta * q) : 0.0; };

  // Empirical survival S(q) = #{r > q}/n is right-continuous and steps down at
  // each distinct sample value; the supremum is attained at a step or just
  // before it.
  double sup = std::abs(1.0 - survival(0.0));
  std::size_t i = 0;
  while (i < r.size()) {
    std::size_t j = i;
    while (j < r.size() && r[j] == r[i]) ++j;
    const double q = r[i];
    const double before = (n - static_cast<double>(i)) / n;
    const double after = (n - static_cast<double>(j)) / n;
    sup = std::max({sup, std::abs(before - survival_left(q)), std::abs(after - survival(q))});
    i = j;
  }
  double beyond = 0.0;
  for (double x : r)
    if (x > t) beyond += 1.0;
  sup = std::max(sup, std::abs(0.0 - survival(t)));
  return {sup, beyond / n};
}

}  // namespace shocksim

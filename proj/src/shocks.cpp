#include "shocksim/shocks.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "shocksim/errors.hpp"

namespace shocksim {

ShockSpace ShockSpace::scalar() { return {1, NormTag::abs(), false, {1.0}}; }

ShockSpace ShockSpace::mean_zero_grid(std::size_t n, double length, NormTag tag) {
  ShockSpace space{n, tag, true, std::vector<double>(n)};
  const double h = length / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    space.profile[i] = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.5) * h / length);
  return space;
}

std::string to_string(ShockKind kind) {
  switch (kind) {
    case ShockKind::Zero: return "zero";
    case ShockKind::Gaussian: return "gaussian";
    case ShockKind::UniformBox: return "uniform-box";
    case ShockKind::ScaledBump: return "scaled-bump";
    case ShockKind::TwoPoint: return "two-point";
  }
  return "?";
}

ShockKind shock_kind_from_string(const std::string& name) {
  if (name == "zero") return ShockKind::Zero;
  if (name == "gaussian" || name == "gaussian-iid-coords") return ShockKind::Gaussian;
  if (name == "uniform-box") return ShockKind::UniformBox;
  if (name == "scaled-bump") return ShockKind::ScaledBump;
  if (name == "two-point") return ShockKind::TwoPoint;
  throw ConfigError("unknown shock law '" + name + "'");
}

namespace {

void project_mean_zero(std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  for (double& x : v) x -= mean;
}

}  // namespace

ShockLaw::ShockLaw(ShockLawSpec spec, ShockSpace space) : spec_(spec), space_(std::move(space)) {
  if (space_.dim == 0) throw ConfigError("shock space has dimension 0");
  if (spec_.dimension && *spec_.dimension != space_.dim)
    throw ConfigError("shock law dimension " + std::to_string(*spec_.dimension) +
                      " does not match state dimension " + std::to_string(space_.dim));
  if (!(spec_.scale >= 0.0) || !std::isfinite(spec_.scale))
    throw ConfigError("shock scale must be finite and nonnegative");
  if (space_.profile.size() != space_.dim) throw ConfigError("shock profile size mismatch");
  if (space_.mean_zero) project_mean_zero(space_.profile);
  profile_norm_ = norm(StateVector(space_.profile, space_.tag));
}

StateVector ShockLaw::sample(CounterEngine& engine) const {
  std::vector<double> v(space_.dim, 0.0);
  const double a = spec_.scale;
  switch (spec_.kind) {
    case ShockKind::Zero:
      break;
    case ShockKind::Gaussian: {
      std::normal_distribution<double> normal(0.0, a);
      for (double& x : v) x = normal(engine);
      if (space_.mean_zero) project_mean_zero(v);
      break;
    }
    case ShockKind::UniformBox:
      for (double& x : v) x = a * (2.0 * engine.uniform() - 1.0);
      if (space_.mean_zero) project_mean_zero(v);
      break;
    case ShockKind::ScaledBump: {
      double amp;
      if (spec_.gaussian_amplitude) {
        amp = std::normal_distribution<double>(0.0, a)(engine);
      } else {
        amp = a * (2.0 * engine.uniform() - 1.0);
      }
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = amp * space_.profile[i];
      break;
    }
    case ShockKind::TwoPoint: {
      const double sign = (engine() & 1u) ? 1.0 : -1.0;
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = sign * a * space_.profile[i];
      break;
    }
  }
  return StateVector(std::move(v), space_.tag);
}

std::optional<NormMoments> ShockLaw::norm_moments() const {
  const double a = spec_.scale;
  const double e = profile_norm_;
  switch (spec_.kind) {
    case ShockKind::Zero:
      return NormMoments{0.0, 0.0};
    case ShockKind::TwoPoint:
      return NormMoments{a * e, a * a * e * e};
    case ShockKind::ScaledBump:
      if (spec_.gaussian_amplitude)
        return NormMoments{a * std::sqrt(2.0 / std::numbers::pi) * e, a * a * e * e};
      return NormMoments{0.5 * a * e, a * a * e * e / 3.0};
    case ShockKind::Gaussian:
      if (space_.dim == 1) return NormMoments{a * std::sqrt(2.0 / std::numbers::pi), a * a};
      return std::nullopt;
    case ShockKind::UniformBox:
      if (space_.dim == 1) return NormMoments{0.5 * a, a * a / 3.0};
      return std::nullopt;
  }
  return std::nullopt;
}

NormMoments sampled_norm_moments(const ShockLaw& law, std::uint64_t seed, std::size_t count) {
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    CounterEngine engine(seed, i >> 32, Purpose::Auxiliary, static_cast<std::uint32_t>(i));
    const double nv = norm(law.sample(engine));
    s1 += nv;
    s2 += nv * nv;
  }
  const auto n = static_cast<double>(count);
  return {s1 / n, s2 / n};
}

}  // namespace shocksim

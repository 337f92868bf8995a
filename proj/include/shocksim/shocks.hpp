#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "shocksim/rng.hpp"
#include "shocksim/state.hpp"

namespace shocksim {

// Shape of the space shocks live in.
struct ShockSpace {
  std::size_t dim = 1;
  NormTag tag = NormTag::abs();
  bool mean_zero = false;        // project samples onto mean-zero vectors
  std::vector<double> profile;   // fixed direction for bump/two-point laws

  static ShockSpace scalar();
  // Grid of n cells on [0, length]; profile cos(pi x / length).
  static ShockSpace mean_zero_grid(std::size_t n, double length, NormTag tag);
};

enum class ShockKind { Zero, Gaussian, UniformBox, ScaledBump, TwoPoint };

struct ShockLawSpec {
  ShockKind kind = ShockKind::Zero;
  double scale = 1.0;                  // sigma, half-width or amplitude
  bool gaussian_amplitude = false;     // scaled-bump only: N(0, scale^2) instead of U[-scale, scale]
  std::optional<std::size_t> dimension;  // must match the space when given
};

std::string to_string(ShockKind kind);
ShockKind shock_kind_from_string(const std::string& name);

struct NormMoments {
  double first;   // E |eta|
  double second;  // E |eta|^2
};

class ShockLaw {
 public:
  // Throws ConfigError on a dimension mismatch or a bad parameter.
  ShockLaw(ShockLawSpec spec, ShockSpace space);

  StateVector sample(CounterEngine& engine) const;
  StateVector zero() const { return StateVector::zeros(space_.dim, space_.tag); }

  // Closed-form moments of the V-norm, when the law admits them.
  std::optional<NormMoments> norm_moments() const;

  const ShockLawSpec& spec() const { return spec_; }
  const ShockSpace& space() const { return space_; }

 private:
  ShockLawSpec spec_;
  ShockSpace space_;
  double profile_norm_ = 1.0;
};

using ShockLawPtr = std::shared_ptr<const ShockLaw>;

// Moments of |eta| estimated by direct sampling, independent of any stream.
NormMoments sampled_norm_moments(const ShockLaw& law, std::uint64_t seed, std::size_t count);

}  // namespace shocksim

#pragma once

#include <cstdint>
#include <memory>

#include "shocksim/process.hpp"

namespace shocksim {

// Stream id families; a stream id is (family << 48) | index.
enum class StreamFamily : std::uint64_t {
  Path = 0,
  Ensemble = 1,
  Clt = 2,
  CkDirect = 3,
  CkFirstStage = 4,
  CkSecondStage = 5,
  EProperty = 6,
  Moments = 7,
  PrePass = 8,
  Bounds = 9,
  Slln = 10,
};

std::uint64_t stream_id(StreamFamily family, std::uint64_t index);

// The shock space matching a semigroup's state space (mean-zero grid for the
// p-Laplacian, unconstrained otherwise).
ShockSpace shock_space_for(const Semigroup& sg);

// Everything needed to spawn reproducible paths: semigroup, shock law, rate
// and root seed.
struct Model {
  SemigroupPtr semigroup;
  ShockLawPtr law;
  double theta = 1.0;
  std::uint64_t seed = 0;
  std::size_t max_jumps = ShockStream::kDefaultMaxJumps;

  std::shared_ptr<ShockStream> stream(StreamFamily family, std::uint64_t index) const;
  ProcessPath path(StreamFamily family, std::uint64_t index, const StateVector& initial) const;
  StateVector zero() const { return semigroup->zero(); }
};

Model make_model(SemigroupPtr semigroup, ShockLawSpec law, double theta, std::uint64_t seed);

}  // namespace shocksim

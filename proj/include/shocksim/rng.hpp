#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace shocksim {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

// Philox4x32 with 10 rounds (Salmon et al., Random123).
PhiloxCounter philox4x32(PhiloxCounter counter, PhiloxKey key);

// Disjoint sub-generator families.  A draw is addressed by
// (seed, family, stream, index, block) and distinct addresses map to
// distinct Philox counters, so streams never overlap.
enum class Purpose : std::uint8_t {
  Gap = 1,
  Shock = 2,
  Initial = 3,
  Auxiliary = 4,
};

// Stream ids carry 56 bits; the family tag lives in the top byte.
constexpr std::uint64_t kStreamMask = (std::uint64_t{1} << 56) - 1;

// Uniform random bit generator over one Philox address.  Cheap to construct,
// so each (stream, index) pair gets its own instance.
class CounterEngine {
 public:
  using result_type = std::uint32_t;

  CounterEngine(std::uint64_t seed, std::uint64_t stream, Purpose purpose, std::uint32_t index);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  std::uint64_t next_u64();
  // Uniform on (0, 1] with 53 random bits.
  double uniform_open_closed();
  // Uniform on [0, 1).
  double uniform();

 private:
  PhiloxKey key_;
  PhiloxCounter counter_;
  PhiloxCounter block_{};
  unsigned used_ = 4;
};

}  // namespace shocksim

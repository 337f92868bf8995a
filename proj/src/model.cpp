#include "shocksim/model.hpp"

#include "shocksim/errors.hpp"
#include "shocksim/plaplacian.hpp"

namespace shocksim {

std::uint64_t stream_id(StreamFamily family, std::uint64_t index) {
  if (index >= (std::uint64_t{1} << 48)) throw InputError("stream index exceeds 48 bits");
  return (static_cast<std::uint64_t>(family) << 48) | index;
}

ShockSpace shock_space_for(const Semigroup& sg) {
  if (const auto* plap = dynamic_cast<const PLaplacianSemigroup*>(&sg)) {
    const auto& g = plap->grid();
    return ShockSpace::mean_zero_grid(g.n(), g.length(), g.lq());
  }
  if (sg.dimension() == 1) return ShockSpace::scalar();
  return {sg.dimension(), sg.v_norm(), false, std::vector<double>(sg.dimension(), 1.0)};
}

std::shared_ptr<ShockStream> Model::stream(StreamFamily family, std::uint64_t index) const {
  return std::make_shared<ShockStream>(theta, seed, stream_id(family, index), law, max_jumps);
}

ProcessPath Model::path(StreamFamily family, std::uint64_t index, const StateVector& initial) const {
  return ProcessPath(semigroup, stream(family, index), initial);
}

Model make_model(SemigroupPtr semigroup, ShockLawSpec law, double theta, std::uint64_t seed) {
  if (!semigroup) throw ConfigError("model needs a semigroup");
  auto shock_law = std::make_shared<const ShockLaw>(law, shock_space_for(*semigroup));
  return Model{std::move(semigroup), std::move(shock_law), theta, seed};
}

}  // namespace shocksim

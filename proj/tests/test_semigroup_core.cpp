#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "shocksim/errors.hpp"
#include "shocksim/ode_semigroup.hpp"
#include "shocksim/semigroup.hpp"

using namespace shocksim;

TEST_CASE("decay envelope values") {
  const DecayCertificate unit{1.0, 1.0, 1.0};
  CHECK(decay_envelope(unit, 0.0, 5.0) == 5.0);
  CHECK(decay_envelope(unit, 3.0, 1.0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(decay_envelope({0.3, 0.7, 2.0}, 12.0, 0.0) == 0.0);
  CHECK(decay_envelope({0.3, 0.7, 2.0}, 0.0, 0.0) == 0.0);
}

TEST_CASE("decay envelope is finite for extreme distances") {
  const DecayCertificate c{0.5, 0.4, 1.0};
  const double tiny = decay_envelope(c, 10.0, 1e-250);
  CHECK(std::isfinite(tiny));
  CHECK(tiny == doctest::Approx(1e-250).epsilon(1e-12));
  const double huge = decay_envelope(c, 10.0, 1e250);
  CHECK(huge == doctest::Approx(std::pow(5.0, -0.4)).epsilon(1e-12));
}

TEST_CASE("decay envelope monotone in t and d0") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const DecayCertificate c{0.05 + 3 * u(gen), 0.1 + 3 * u(gen), 1.0};
    const double t = 1e3 * u(gen) * u(gen), dt = u(gen);
    const double d = 10 * u(gen), dd = u(gen);
    CHECK(decay_envelope(c, t + dt, d) <= decay_envelope(c, t, d) * (1 + 1e-14));
    CHECK(decay_envelope(c, t, d + dd) >= decay_envelope(c, t, d) * (1 - 1e-14));
    CHECK(decay_envelope(c, t, d) <= d * (1 + 1e-14));
  }
}

TEST_CASE("certificate validation") {
  CHECK_THROWS_AS((DecayCertificate{0.0, 1.0, 1.0}.validate()), InputError);
  CHECK_THROWS_AS((DecayCertificate{1.0, -1.0, 1.0}.validate()), InputError);
  CHECK_THROWS_AS((DecayCertificate{1.0, 1.0, 0.0}.validate()), InputError);
  CHECK_NOTHROW((DecayCertificate{1.0, 1.0, 1.0}.validate()));
}

namespace {

// A contraction without a certificate, for the configuration-error path.
class Halving final : public Semigroup {
 public:
  std::string id() const override { return "halving"; }
  StateVector evolve(double t, const StateVector& s) const override {
    return std::exp(-t) * s;
  }
  bool fixes_zero() const override { return true; }
  std::optional<DecayCertificate> certificate() const override { return std::nullopt; }
  NormTag v_norm() const override { return NormTag::abs(); }
  double contract_tolerance() const override { return 0.0; }
  std::size_t dimension() const override { return 1; }
};

}  // namespace

TEST_CASE("check_decay_bound needs a certificate") {
  Halving sg;
  std::vector<DecaySample> samples{{1.0, StateVector::scalar(1.0), StateVector::scalar(0.0)}};
  CHECK_THROWS_AS(check_decay_bound(sg, samples), ConfigError);
  // An explicitly supplied certificate is used instead.
  const auto rep = check_decay_bound(sg, samples, DecayCertificate{1e-3, 1.0, 1.0});
  CHECK(rep.passed(0.0));
}

TEST_CASE("check_decay_bound on equal states is an equality") {
  OdeSemigroup sg({1.0});
  std::vector<DecaySample> samples{{2.0, StateVector::scalar(0.3), StateVector::scalar(0.3)}};
  const auto rep = check_decay_bound(sg, samples);
  CHECK(rep.worst_margin_w == 0.0);
}

TEST_CASE("check_decay_bound finds the offending sample") {
  OdeSemigroup sg({1.0});
  std::vector<DecaySample> samples{
      {1.0, StateVector::scalar(1.0), StateVector::scalar(0.0)},
      {1.0, StateVector::scalar(2.0), StateVector::scalar(-1.0)},
  };
  // kappa far above the true 1/2 must be falsified.
  const auto rep = check_decay_bound(sg, samples, DecayCertificate{50.0, 1.0, 1.0});
  CHECK_FALSE(rep.passed(1e-12));
  CHECK(rep.worst_margin_w > 0.0);
  CHECK(rep.worst_index < samples.size());
}

TEST_CASE("polynomial bound oracle: exact ODE solution is tight") {
  const double kappa = 0.7, rho = 1.3, f0 = 2.5;
  std::vector<TimeSample> s;
  for (double t : log_time_grid(1e-3, 1e3, 200))
    s.push_back({t, std::pow(kappa * t + std::pow(f0, -1.0 / rho), -rho)});
  // d/dt of the closed form equals -kappa rho f^(1+1/rho); a central
  // difference confirms it before the bound is trusted.
  for (std::size_t i = 1; i + 1 < s.size(); i += 17) {
    const double t = s[i].t, e = 1e-6 * t;
    auto f = [&](double x) { return std::pow(kappa * x + std::pow(f0, -1.0 / rho), -rho); };
    const double fd = (f(t + e) - f(t - e)) / (2 * e);
    CHECK(fd == doctest::Approx(-kappa * rho * std::pow(f(t), 1 + 1 / rho)).epsilon(1e-6));
  }
  const auto r = polynomial_bound_oracle(s, kappa, rho);
  CHECK(r.passed);
  CHECK(std::abs(r.worst_margin) <= 1e-12);
}

TEST_CASE("polynomial bound oracle: zero and constant functions") {
  std::vector<TimeSample> zero{{0.0, 0.0}, {1.0, 0.0}, {5.0, 0.0}};
  CHECK(polynomial_bound_oracle(zero, 1.0, 1.0).passed);
  std::vector<TimeSample> constant{{0.0, 1.0}, {0.5, 1.0}, {2.0, 1.0}};
  const auto r = polynomial_bound_oracle(constant, 1.0, 1.0);
  CHECK_FALSE(r.passed);
  CHECK(r.worst_margin == doctest::Approx(1.0 - 1.0 / 3.0));
}

TEST_CASE("polynomial bound oracle rejects bad input") {
  std::vector<TimeSample> unsorted{{0.0, 1.0}, {2.0, 0.5}, {1.0, 0.4}};
  CHECK_THROWS_AS(polynomial_bound_oracle(unsorted, 1.0, 1.0), InputError);
  std::vector<TimeSample> negative{{0.0, 1.0}, {1.0, -0.1}};
  CHECK_THROWS_AS(polynomial_bound_oracle(negative, 1.0, 1.0), InputError);
  std::vector<TimeSample> no_origin{{0.5, 1.0}};
  CHECK_THROWS_AS(polynomial_bound_oracle(no_origin, 1.0, 1.0), InputError);
}

TEST_CASE("log time grid") {
  const auto g = log_time_grid(1e-2, 1e3, 6);
  REQUIRE(g.size() == 7);
  CHECK(g.front() == 0.0);
  CHECK(g[1] == doctest::Approx(1e-2));
  CHECK(g.back() == doctest::Approx(1e3));
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] > g[i - 1]);
}

TEST_CASE("state vector norms") {
  CHECK(norm(StateVector::scalar(-3.0)) == 3.0);
  const StateVector v({1.0, -1.0, 1.0, -1.0}, NormTag::lq(2.0, 0.25));
  CHECK(norm(v) == doctest::Approx(1.0));
  CHECK(norm(v, NormTag::lq(1.0, 0.25)) == doctest::Approx(1.0));
  CHECK(norm(StateVector::zeros(3, NormTag::lq(2.0, 1.0))) == 0.0);
  CHECK_THROWS_AS(StateVector({}, NormTag::abs()), InputError);
  CHECK_THROWS_AS(StateVector({std::nan("")}, NormTag::abs()), InputError);
}

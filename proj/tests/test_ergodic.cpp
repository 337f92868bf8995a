#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <memory>
#include <random>

#include "shocksim/ergodic.hpp"
#include "shocksim/errors.hpp"
#include "shocksim/model.hpp"
#include "shocksim/ode_semigroup.hpp"
#include "shocksim/plaplacian.hpp"
#include "shocksim/stats.hpp"

using namespace shocksim;

namespace {

SemigroupPtr ode(double rho) { return std::make_shared<const OdeSemigroup>(OdeSemigroupParams{rho}); }

const Functional kAbs = Functional::v_norm(NormTag::abs());
const Functional kId = Functional::coordinate(0, NormTag::abs());

}  // namespace

TEST_CASE("sample moments and normal cdf") {
  const std::vector<double> x{1.0, 2.0, 4.0, 7.0};
  CHECK(stats::mean(x) == 3.5);
  CHECK(stats::variance(x) == doctest::Approx(7.0));
  CHECK(stats::variance(std::vector<double>{3.0}) == 0.0);
  CHECK(stats::normal_cdf(0.0) == 0.5);
  CHECK(stats::normal_cdf(stats::kZ95) == doctest::Approx(0.975).epsilon(1e-14));
  CHECK(stats::normal_cdf(-8.0) == doctest::Approx(6.22096057427178e-16).epsilon(1e-10));

  std::mt19937_64 gen(1);
  std::normal_distribution<double> n(0.0, 2.0);
  std::vector<double> s(200000);
  for (double& v : s) v = n(gen);
  // Gaussian: sd of the sample variance is sigma^2 sqrt(2 / (n - 1)).
  CHECK(stats::variance_standard_error(s) ==
        doctest::Approx(4.0 * std::sqrt(2.0 / (s.size() - 1.0))).epsilon(0.03));
}

TEST_CASE("Kolmogorov-Smirnov statistics by hand") {
  auto uniform = [](double x) { return std::clamp(x, 0.0, 1.0); };
  CHECK(stats::ks_one_sample(std::vector<double>{0.5}, uniform) == doctest::Approx(0.5));
  CHECK(stats::ks_one_sample(std::vector<double>{0.75, 0.25}, uniform) == doctest::Approx(0.25));
  CHECK(stats::ks_one_sample(std::vector<double>{0.1, 0.1, 0.1}, uniform) == doctest::Approx(0.9));

  CHECK(stats::ks_two_sample(std::vector<double>{1, 2, 3}, std::vector<double>{4, 5, 6}) == 1.0);
  CHECK(stats::ks_two_sample(std::vector<double>{1, 2, 3}, std::vector<double>{3, 2, 1}) == 0.0);
  CHECK(stats::ks_two_sample(std::vector<double>{1, 2, 3, 4}, std::vector<double>{2.5, 3.5}) ==
        doctest::Approx(0.5));
  const std::vector<double> a{1.0, 2.0}, b{1.0 + 1e-15, 2.0 - 1e-15};
  CHECK(stats::ks_two_sample(a, b) == 0.5);
  CHECK(stats::ks_two_sample(a, b, 1e-12) == 0.0);

  // c(0.05) = 1.3581, c(0.01) = 1.6276.
  CHECK(stats::ks_critical_two_sample(0.05, 100, 100) == doctest::Approx(1.35810 * std::sqrt(0.02)).epsilon(1e-4));
  CHECK(stats::ks_critical_two_sample(0.01, 10000, 10000) ==
        doctest::Approx(1.62762 * std::sqrt(2e-4)).epsilon(1e-4));
  CHECK(stats::kolmogorov_tail(1.35810) == doctest::Approx(0.05).epsilon(1e-3));
  CHECK(stats::kolmogorov_tail(1.62762) == doctest::Approx(0.01).epsilon(1e-3));
  CHECK(stats::kolmogorov_tail(0.0) == 1.0);
}

TEST_CASE("batch means") {
  const std::vector<double> b{1.0, 3.0, 2.0, 2.0};
  const auto bm = stats::batch_means(b);
  CHECK(bm.mean == 2.0);
  CHECK(bm.standard_error == doctest::Approx(std::sqrt((2.0 / 3.0) / 4.0)));
  CHECK(bm.batches == 4);
  CHECK_THROWS_AS(stats::batch_means(std::vector<double>{1.0}), InputError);
}

TEST_CASE("functionals") {
  CHECK(kAbs(StateVector::scalar(-2.5)) == 2.5);
  CHECK(kId(StateVector::scalar(-2.5)) == -2.5);
  CHECK(kId.shifted(1.0)(StateVector::scalar(-2.5)) == -1.5);
  const auto c = kId.clipped(-1.0, 1.0);
  CHECK(c.bounded());
  CHECK_FALSE(kId.bounded());
  CHECK(c(StateVector::scalar(-2.5)) == -1.0);
  CHECK(c.lipschitz() == 1.0);
  CHECK_THROWS_AS(kId.clipped(1.0, 1.0), InputError);

  const auto g = PLapGrid::uniform(16, 2.0, 3.0, 1.0, 1.5);
  const auto coord = Functional::coordinate(3, g.lq());
  CHECK(coord.lipschitz() == doctest::Approx(std::pow(g.h(), -1.0 / 1.5)));
  std::mt19937_64 gen(2);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    std::vector<double> u(16), v(16);
    for (auto& x : u) x = n(gen);
    for (auto& x : v) x = n(gen);
    const auto a = g.state(u), b = g.state(v);
    for (const auto& psi : {coord, Functional::v_norm(g.lq()), coord.clipped(-0.1, 0.2)})
      CHECK(std::abs(psi(a) - psi(b)) <= psi.lipschitz() * distance(a, b, g.lq()) * (1 + 1e-12));
  }
  CHECK(!kAbs.describe().empty());
}

TEST_CASE("time average against closed forms") {
  auto m = make_model(ode(1.0), {ShockKind::Zero}, 1.0, 1);
  auto from_zero = m.path(StreamFamily::Path, 0, StateVector::scalar(0.0));
  CHECK(time_average(from_zero, kAbs, 50.0, 1e-2) == 0.0);

  auto path = m.path(StreamFamily::Path, 0, StateVector::scalar(1.0));
  const double oracle = 0.239789527279837054;  // ln(11) / 10
  CHECK(time_average(path, kId, 10.0, 1e-2) == doctest::Approx(oracle).epsilon(1e-6));
  CHECK(integrate_accurate(path, kId, 0.0, 10.0) / 10.0 == doctest::Approx(oracle).epsilon(1e-13));
  for (double T : {1.0, 100.0, 1e4})
    CHECK(integrate_accurate(path, kId, 0.0, T) / T == doctest::Approx(std::log1p(T) / T).epsilon(1e-12));
}

TEST_CASE("quadrature resolution") {
  auto m = make_model(ode(1.0), {ShockKind::TwoPoint, 1.0}, 1.0, 2);
  const double dt = default_quad_dt(m);
  CHECK(dt == doctest::Approx(1e-2));
  auto path = m.path(StreamFamily::Path, 0, StateVector::scalar(0.0));
  const auto coarse = integrate_midpoint(path, kAbs, 0.0, 200.0, dt);
  const auto fine = integrate_midpoint(path, kAbs, 0.0, 200.0, dt / 2);
  CHECK(std::abs(coarse.value - fine.value) / 200.0 < 1e-6);
  CHECK(coarse.segments > 100);
  const double ref = integrate_accurate(path, kAbs, 0.0, 200.0);
  CHECK(std::abs(fine.value - ref) / 200.0 < 1e-6);
  CHECK(std::abs(integrate_midpoint(path, kAbs, 3.0, 7.0, dt).value - integrate_accurate(path, kAbs, 3.0, 7.0)) <
        1e-5);
  CHECK_THROWS_AS(integrate_midpoint(path, kAbs, 2.0, 1.0, dt), InputError);

  const auto g = PLapGrid::uniform(16, 1.0, 3.0);
  auto pm = make_model(std::make_shared<const PLaplacianSemigroup>(g, 4e-3), {ShockKind::ScaledBump}, 1.0, 3);
  CHECK(default_quad_dt(pm) == doctest::Approx(4e-3));
}

TEST_CASE("stationary mean") {
  auto zero = make_model(ode(1.0), {ShockKind::Zero}, 1.0, 4);
  const auto z = stationary_mean(zero, kAbs, {.burn_in = 10.0, .horizon = 100.0, .replicas = 50});
  CHECK(z.time_average == 0.0);
  CHECK(z.ensemble_mean == 0.0);
  CHECK(z.consistent);

  auto m = make_model(ode(1.0), {ShockKind::TwoPoint, 1.0}, 1.0, 5);
  const auto s = stationary_mean(m, kAbs, {.burn_in = 50.0, .horizon = 2000.0, .replicas = 2000, .strict = true});
  CHECK(s.consistent);
  CHECK(s.time_average > 0.0);
  CHECK(s.time_average_se > 0.0);
  CHECK(s.ensemble_se > 0.0);
  CHECK_THROWS_AS(stationary_mean(m, kAbs, {.burn_in = 1.0}), InputError);
}

TEST_CASE("initial-condition forgetting") {
  auto m = make_model(ode(1.0), {ShockKind::TwoPoint, 1.0}, 1.0, 6);
  const auto f = initial_forgetting(m, kAbs, StateVector::scalar(0.0), StateVector::scalar(100.0), 1000.0, 1e-2);
  CHECK(f.passed);
  // (1/T)[100 + 2 ln T]: the certificate has C kappa^-rho = 2.
  CHECK(f.bound == doctest::Approx((100.0 + 2.0 * std::log(1000.0)) / 1000.0));
  CHECK(f.difference > 0.0);
  CHECK(f.difference <= f.bound + f.quadrature_error + f.ci_half_width);
}

TEST_CASE("tail power integral") {
  CHECK(tail_power_integral(1.0, 0.4) == 0.0);
  CHECK(tail_power_integral(100.0, 1.0) == doctest::Approx(std::log(100.0)));
  CHECK(tail_power_integral(100.0, 2.0) == doctest::Approx(0.99));
  CHECK(tail_power_integral(100.0, 0.5) == doctest::Approx(18.0));
}

TEST_CASE("SLLN stabilization") {
  auto m = make_model(ode(1.0), {ShockKind::TwoPoint, 1.0}, 1.0, 7);
  const auto s = slln_stabilization(m, kAbs, m.zero(), 2000.0, 32, 1e-2);
  CHECK(s.passed);
  CHECK(s.batch_averages.size() == 64);
  CHECK(std::abs(s.average_2t - s.average_t) <= s.ci_half_width);
}

TEST_CASE("CLT statistic: degenerate and shift invariant") {
  auto zero = make_model(ode(1.0), {ShockKind::Zero}, 1.0, 8);
  const auto d = clt_experiment(zero, kId, {.horizon = 50.0, .replicas = 20});
  CHECK(d.degenerate);
  CHECK(d.sigma2_hat == 0.0);
  CHECK(std::isnan(d.ks_distance));
  for (double s : d.clt_samples) CHECK(s == 0.0);

  auto m = make_model(ode(1.0), {ShockKind::TwoPoint, 1.0}, 1.0, 9);
  const CltOptions base{.horizon = 50.0, .replicas = 64, .psi_bar = 0.7};
  CltOptions moved = base;
  moved.psi_bar += 3.0;
  const auto a = clt_experiment(m, kAbs, base);
  const auto b = clt_experiment(m, kAbs.shifted(3.0), moved);
  REQUIRE(a.clt_samples.size() == 64);
  for (std::size_t r = 0; r < 64; ++r) CHECK(b.clt_samples[r] == doctest::Approx(a.clt_samples[r]).epsilon(1e-9));
  CHECK(a.stream_ids == b.stream_ids);
  CHECK(b.sigma2_hat == doctest::Approx(a.sigma2_hat).epsilon(1e-8));
}

TEST_CASE("CLT statistic for the slow-decay counterexample") {
  auto m = make_model(ode(0.4), {ShockKind::Zero}, 1.0, 10);
  const double T = 100.0;
  const auto rep = clt_experiment(m, kId, {.horizon = T, .replicas = 8, .burn_in = 0.0, .initial = StateVector::scalar(1.0)});
  const double closed = (std::pow(T + 1.0, 0.6) - 1.0) / (0.6 * std::sqrt(T));
  for (double s : rep.clt_samples) CHECK(s == doctest::Approx(closed).epsilon(1e-5));
  CHECK(rep.degenerate);
  CHECK(counterexample_statistic(0.4, T) == doctest::Approx(closed).epsilon(1e-14));
}

TEST_CASE("CLT normality at moderate scale") {
  auto m = make_model(ode(1.0), {ShockKind::TwoPoint, 1.0}, 1.0, 11);
  const auto pre = replica_mean(m, kAbs, 50.0, 200.0, 800, 1e-2, m.zero());
  const auto rep = clt_experiment(m, kAbs, {.horizon = 200.0, .replicas = 600, .psi_bar = pre.mean,
                                            .psi_bar_se = pre.standard_error, .stream_offset = 1u << 20});
  CHECK_FALSE(rep.degenerate);
  CHECK(rep.sigma2_hat > 0.0);
  CHECK(rep.ks_p_value > 1e-3);
  CHECK(rep.replica_time_averages.size() == 600);
}

TEST_CASE("Chapman-Kolmogorov") {
  const std::vector<Functional> psis{kId, kAbs};
  auto zero = make_model(ode(1.0), {ShockKind::Zero}, 1.0, 12);
  const auto z = chapman_kolmogorov_test(zero, StateVector::scalar(2.0), 1.0, 1.0, psis, 200);
  CHECK(z.max_ks == 0.0);
  CHECK(z.passed);

  auto m = make_model(ode(1.0), {ShockKind::TwoPoint, 1.0}, 1.0, 13);
  const auto h0 = chapman_kolmogorov_test(m, StateVector::scalar(2.0), 1.0, 0.0, psis, 500);
  CHECK(h0.passed);
  const auto r = chapman_kolmogorov_test(m, StateVector::scalar(2.0), 1.0, 1.0, psis, 4000);
  CHECK(r.passed);
  CHECK(r.max_ks < r.critical_value);
  CHECK(r.direct.size() == 4000);
  CHECK_THROWS_AS(chapman_kolmogorov_test(m, StateVector::scalar(2.0), 0.0, 1.0, psis, 10), InputError);
}

TEST_CASE("e-property") {
  auto m = make_model(ode(1.0), {ShockKind::Gaussian, 1.0}, 1.0, 14);
  const auto psi = kId.clipped(-1.0, 1.0);
  const std::vector<double> t{0.1, 1.0, 10.0, 100.0};
  const std::vector<StateVector> same{StateVector::scalar(0.5)};
  const auto s = e_property_test(m, psi, StateVector::scalar(0.5), same, t, 100);
  CHECK(s.worst_lipschitz_margin == 0.0);
  const std::vector<StateVector> near{StateVector::scalar(0.501), StateVector::scalar(-3.0), StateVector::scalar(40.0)};
  const auto r = e_property_test(m, psi, StateVector::scalar(0.5), near, t, 200);
  CHECK(r.worst_lipschitz_margin <= 1e-15);
  CHECK(r.worst_decay_margin <= 1e-12);
  CHECK(r.worst_expectation_gap <= 1.0 + 1e-12);
  CHECK(r.comparisons == near.size() * t.size() * 200);
  CHECK_THROWS_AS(e_property_test(m, kId, StateVector::scalar(0.5), near, t, 10), InputError);
}

TEST_CASE("compound Poisson moments") {
  auto zero = make_model(ode(1.0), {ShockKind::Zero}, 1.0, 15);
  const auto z = compound_moment_check(zero, 10.0, 1000);
  CHECK(z.mc_mean == 0.0);
  CHECK(z.theory_variance == 0.0);

  auto two = make_model(ode(1.0), {ShockKind::TwoPoint, 1.0}, 1.0, 16);
  const auto r = compound_moment_check(two, 10.0, 100000);
  CHECK(r.theory_mean == 10.0);
  CHECK(r.theory_variance == 10.0);
  CHECK(r.rel_error_mean < 0.02);
  CHECK(r.rel_error_variance < 0.02);
  CHECK(r.closed_form);

  const auto g = PLapGrid::uniform(16, 1.0, 3.0);
  auto pm = make_model(std::make_shared<const PLaplacianSemigroup>(g, 1e-3), {ShockKind::Gaussian, 0.5}, 2.0, 17);
  const auto pg = compound_moment_check(pm, 5.0, 100000);
  CHECK_FALSE(pg.closed_form);
  CHECK(pg.rel_error_mean < 0.02);
  CHECK(pg.rel_error_variance < 0.02);
}

TEST_CASE("results do not depend on the thread count") {
  auto m = make_model(ode(1.0), {ShockKind::TwoPoint, 1.0}, 1.0, 18);
  const CltOptions opts{.horizon = 30.0, .replicas = 40, .burn_in = 10.0, .psi_bar = 0.5};
  setenv("SHOCKSIM_THREADS", "1", 1);
  const auto a = clt_experiment(m, kAbs, opts);
  setenv("SHOCKSIM_THREADS", "3", 1);
  const auto b = clt_experiment(m, kAbs, opts);
  unsetenv("SHOCKSIM_THREADS");
  CHECK(a.clt_samples == b.clt_samples);
  CHECK(a.sigma2_hat == b.sigma2_hat);
}

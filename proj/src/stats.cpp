#include "shocksim/stats.hpp"

#include <algorithm>
#include <cmath>

#include "shocksim/errors.hpp"

namespace shocksim::stats {

double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v;
  return acc / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double acc = 0.0;
  for (double v : x) acc += (v - m) * (v - m);
  return acc / static_cast<double>(x.size() - 1);
}

double variance_standard_error(std::span<const double> x) {
  const auto n = static_cast<double>(x.size());
  if (x.size() < 4) return 0.0;
  const double m = mean(x);
  double m2 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = (v - m) * (v - m);
    m2 += d;
    m4 += d * d;
  }
  m2 /= n;
  m4 /= n;
  // Var(s^2) = (mu4 - (n-3)/(n-1) sigma^4) / n
  const double var = (m4 - (n - 3.0) / (n - 1.0) * m2 * m2) / n;
  return std::sqrt(std::max(var, 0.0));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double ks_one_sample(std::span<const double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw InputError("KS test on an empty sample");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_two_sample(std::span<const double> a, std::span<const double> b, double tie_tolerance) {
  if (a.empty() || b.empty()) throw InputError("KS test on an empty sample");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const auto n = static_cast<double>(x.size()), m = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() || j < y.size()) {
    // Smallest remaining value; consume everything tied with it from both sides.
    double v;
    if (j >= y.size() || (i < x.size() && x[i] <= y[j])) {
      v = x[i];
    } else {
      v = y[j];
    }
    const double limit = v + tie_tolerance * std::max(1.0, std::abs(v));
    while (i < x.size() && x[i] <= limit) ++i;
    while (j < y.size() && y[j] <= limit) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  return d;
}

double ks_critical_two_sample(double alpha, std::size_t n, std::size_t m) {
  const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  const auto nn = static_cast<double>(n), mm = static_cast<double>(m);
  return c * std::sqrt((nn + mm) / (nn * mm));
}

double kolmogorov_tail(double lambda) {
  if (lambda <= 0.0) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

BatchMeans batch_means(std::span<const double> batch_averages) {
  if (batch_averages.size() < 2) throw InputError("batch means need at least two batches");
  const double m = mean(batch_averages);
  const double se = std::sqrt(variance(batch_averages) / static_cast<double>(batch_averages.size()));
  return {m, se, batch_averages.size()};
}

}  // namespace shocksim::stats

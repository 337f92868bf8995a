#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace shocksim::stats {

double mean(std::span<const double> x);
// Unbiased sample variance; 0 for fewer than two samples.
double variance(std::span<const double> x);
// Standard error of the sample variance from the fourth central moment.
double variance_standard_error(std::span<const double> x);

double normal_cdf(double x);

// sup |F_n - F| against a continuous CDF.
double ks_one_sample(std::span<const double> samples, const std::function<double(double)>& cdf);

// Two-sample statistic sup |F_a - F_b|.  Values closer than tie_tolerance
// (relative to max(1, |x|)) count as ties.
double ks_two_sample(std::span<const double> a, std::span<const double> b, double tie_tolerance = 0.0);

// Asymptotic two-sample critical value c(alpha) sqrt((n + m) / (n m)).
double ks_critical_two_sample(double alpha, std::size_t n, std::size_t m);

// Asymptotic Kolmogorov tail P(K > lambda).
double kolmogorov_tail(double lambda);

struct BatchMeans {
  double mean;
  double standard_error;
  std::size_t batches;
};

// Batch-means estimate from per-batch averages of equal length.
BatchMeans batch_means(std::span<const double> batch_averages);

// Two-sided 95% normal quantile.
inline constexpr double kZ95 = 1.959963984540054;

}  // namespace shocksim::stats

#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace moran::stats {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

// Sample mean and standard error of the mean.
MeanSe mean_se(std::span<const double> xs);

struct WilsonInterval {
  double freq = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

// Wilson score interval for a binomial frequency (default 95%).
WilsonInterval wilson(std::int64_t successes, std::int64_t n, double z = 1.959963984540054);

// Upper tail of the standard normal.
double normal_sf(double z);

struct ChiSquare {
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
};

// Goodness-of-fit of observed counts against expected probabilities.
// Adjacent cells with expected count below `min_expected` are pooled.
ChiSquare chi_square_gof(std::span<const std::int64_t> observed,
                         std::span<const double> expected_probs,
                         double min_expected = 5.0);

struct Kendall {
  double tau_b = 0.0;
  double z = 0.0;
  double p_greater = 1.0;  // one-sided, H1: positive association
  std::size_t n = 0;
};

// Kendall tau-b with tie-corrected normal approximation.
Kendall kendall_tau_b(std::span<const double> x, std::span<const double> y);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double r2 = 0.0;
};

// Ordinary least squares of y on x; requires >= 2 distinct x.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

}  // namespace moran::stats

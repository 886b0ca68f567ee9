#pragma once

#include <span>
#include <vector>

namespace anisolt {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  std::size_t points = 0;
};

/// Ordinary least squares y = intercept + slope * x.
LinearFit ols_fit(std::span<const double> x, std::span<const double> y);

double mean(std::span<const double> v);
/// Unbiased sample variance.
double variance(std::span<const double> v);
/// Standard error of the mean.
double std_error(std::span<const double> v);
/// Linear-interpolation quantile (type 7), p in [0,1].
double quantile(std::vector<double> v, double p);

}  // namespace anisolt

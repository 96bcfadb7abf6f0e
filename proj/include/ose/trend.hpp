#pragma once

#include <cstddef>
#include <span>
#include <utility>

namespace ose {

struct TrendResult {
  double slope = 0;
  double intercept = 0;
  double p_value = 1;  // two-sided, H0: slope == 0
  std::size_t n = 0;
};

/// Ordinary least squares fit of y on x with a Student t test on the slope.
/// A perfect fit gives p = 0 for a nonzero slope and p = 1 for a flat line.
/// Throws Error(InvalidParams) below three points and Error(DegenerateSeries)
/// when every x is equal.
TrendResult trend_test(std::span<const std::pair<double, double>> series);

}  // namespace ose

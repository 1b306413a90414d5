#pragma once

#include <span>
#include <vector>

namespace radloc {

/// Quantile with linear interpolation between order statistics, inclusive
/// endpoints: position q*(n-1), interpolated. `sorted` must be ascending.
/// This is the convention every quantile in the project uses, so bin counts
/// and robust-scaler parameters are reproducible.
double quantile_sorted(std::span<const double> sorted, double q);

/// Convenience: copies, sorts, and calls quantile_sorted.
double quantile(std::span<const double> values, double q);

double mean(std::span<const double> values);

/// Sample standard deviation (n - 1 denominator). Requires n >= 2.
double sample_stddev(std::span<const double> values);

}  // namespace radloc

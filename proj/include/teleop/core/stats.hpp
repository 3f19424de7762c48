#pragma once

#include <span>
#include <vector>

namespace teleop {

/// Median by linear interpolation of the two middle values; 0 for empty input.
double median(std::span<const double> values);

/// Nearest-rank percentile: the smallest sample such that at least p% of the
/// samples are <= it. p in (0, 100]. 0 for empty input.
double percentile_nearest_rank(std::span<const double> values, double p);

/// Population standard deviation; 0 for fewer than two values.
double population_stddev(std::span<const double> values);

double mean(std::span<const double> values);

}  // namespace teleop

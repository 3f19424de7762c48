#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "teleop/metrics/report.hpp"

namespace teleop::metrics {

enum class MetricKey { d_trans, d_rot, path_length, completion_time, j_trans, j_rot };

std::optional<MetricKey> metric_key_from_string(std::string_view s);
std::string_view to_string(MetricKey key);

/// Scalar used for percentile filtering. `path_length` is
/// d_trans + rot_weight * d_rot (rot_weight in meters per radian).
struct KeySelector {
  MetricKey key = MetricKey::d_trans;
  double rot_weight = 0.0;

  [[nodiscard]] double operator()(const MetricReport& r) const;
};

/// Ids of successful demos whose key is <= the nearest-rank p-th percentile
/// of the successful demos of the same task. Ties are all kept. Output is
/// sorted by id.
std::vector<std::string> filter_by_percentile(std::span<const MetricReport> reports, double percent,
                                              const KeySelector& key);

}  // namespace teleop::metrics

#include "teleop/metrics/filter.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "teleop/core/stats.hpp"

namespace teleop::metrics {

std::optional<MetricKey> metric_key_from_string(std::string_view s) {
  if (s == "d_trans") return MetricKey::d_trans;
  if (s == "d_rot") return MetricKey::d_rot;
  if (s == "path_length") return MetricKey::path_length;
  if (s == "completion_time") return MetricKey::completion_time;
  if (s == "j_trans") return MetricKey::j_trans;
  if (s == "j_rot") return MetricKey::j_rot;
  return std::nullopt;
}

std::string_view to_string(MetricKey key) {
  switch (key) {
    case MetricKey::d_trans: return "d_trans";
    case MetricKey::d_rot: return "d_rot";
    case MetricKey::path_length: return "path_length";
    case MetricKey::completion_time: return "completion_time";
    case MetricKey::j_trans: return "j_trans";
    case MetricKey::j_rot: return "j_rot";
  }
  return "d_trans";
}

double KeySelector::operator()(const MetricReport& r) const {
  switch (key) {
    case MetricKey::d_trans: return r.d_trans;
    case MetricKey::d_rot: return r.d_rot;
    case MetricKey::path_length: return r.d_trans + rot_weight * r.d_rot;
    case MetricKey::completion_time: return r.completion_time;
    case MetricKey::j_trans: return r.j_trans;
    case MetricKey::j_rot: return r.j_rot;
  }
  return r.d_trans;
}

std::vector<std::string> filter_by_percentile(std::span<const MetricReport> reports, double percent,
                                              const KeySelector& key) {
  if (!(percent > 0.0 && percent <= 100.0)) {
    throw std::invalid_argument("percentile must be in (0, 100]");
  }
  std::map<std::string, std::vector<const MetricReport*>> by_task;
  for (const auto& r : reports) {
    if (r.success) by_task[r.task].push_back(&r);
  }

  std::vector<std::string> kept;
  for (const auto& [task, group] : by_task) {
    std::vector<double> values;
    values.reserve(group.size());
    for (const auto* r : group) values.push_back(key(*r));
    const double threshold = percentile_nearest_rank(values, percent);
    for (const auto* r : group) {
      if (key(*r) <= threshold) kept.push_back(r->demo_id);
    }
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

}  // namespace teleop::metrics

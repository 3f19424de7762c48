#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "teleop/metrics/filter.hpp"

namespace teleop::datapipe {

struct TaskStats {
  std::uint64_t demos = 0;      // sealed records
  std::uint64_t successes = 0;
  double hours = 0.0;           // summed completion time of successful demos

  friend bool operator==(const TaskStats&, const TaskStats&) = default;
};

struct DatasetStats {
  std::map<std::string, TaskStats> per_task;
  TaskStats total;
  std::size_t quarantined = 0;
};

/// Scans `dir` (quarantining partial files) and tallies sealed records. With
/// a manifest only the listed demo ids count.
DatasetStats dataset_stats(const std::filesystem::path& dir, const std::optional<std::set<std::string>>& manifest = {});

/// Metric reports of every sealed record, built on demand for records whose
/// footer has none.
std::vector<metrics::MetricReport> load_reports(const std::filesystem::path& dir);

struct Manifest {
  double percentile = 100.0;
  std::string key;
  std::vector<std::string> kept;  // sorted demo ids

  friend bool operator==(const Manifest&, const Manifest&) = default;
};

/// Applies the per-task percentile filter over successful demos. Source files
/// are not touched.
Manifest clean(const std::filesystem::path& dir, double percentile, const metrics::KeySelector& key);

void write_manifest(const std::filesystem::path& path, const Manifest& m);
Manifest read_manifest(const std::filesystem::path& path);

}  // namespace teleop::datapipe

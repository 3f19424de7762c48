#include "teleop/datapipe/dataset.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "teleop/datapipe/record_io.hpp"
#include "teleop/datapipe/writer.hpp"
#include "teleop/metrics/metrics.hpp"

namespace teleop::datapipe {

namespace fs = std::filesystem;

DatasetStats dataset_stats(const fs::path& dir, const std::optional<std::set<std::string>>& manifest) {
  DatasetStats out;
  const ScanResult scanned = scan(dir);
  out.quarantined = scanned.quarantined.size();
  for (const auto& p : scanned.sealed) {
    const DemonstrationRecord rec = read_record(p);
    if (manifest && !manifest->count(rec.header.demo_id)) continue;
    TaskStats& t = out.per_task[rec.header.task];
    ++t.demos;
    ++out.total.demos;
    if (rec.outcome == Outcome::success) {
      const double seconds = rec.report ? rec.report->completion_time : metrics::build_report(rec).completion_time;
      ++t.successes;
      ++out.total.successes;
      t.hours += seconds / 3600.0;
      out.total.hours += seconds / 3600.0;
    }
  }
  return out;
}

std::vector<metrics::MetricReport> load_reports(const fs::path& dir) {
  std::vector<metrics::MetricReport> out;
  for (const auto& p : scan(dir).sealed) {
    const DemonstrationRecord rec = read_record(p);
    if (rec.report) {
      out.push_back(*rec.report);
    } else if (!rec.rows.empty()) {
      out.push_back(metrics::build_report(rec));
    }
  }
  return out;
}

Manifest clean(const fs::path& dir, double percentile, const metrics::KeySelector& key) {
  const std::vector<metrics::MetricReport> reports = load_reports(dir);
  Manifest m;
  m.percentile = percentile;
  m.key = std::string(metrics::to_string(key.key));
  m.kept = metrics::filter_by_percentile(reports, percentile, key);
  return m;
}

void write_manifest(const fs::path& path, const Manifest& m) {
  const nlohmann::json j = {{"percentile", m.percentile}, {"key", m.key}, {"kept", m.kept}};
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::CorruptRecord, "cannot write " + path.string());
  out << j.dump() << '\n';
}

Manifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::CorruptRecord, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const auto j = nlohmann::json::parse(ss.str(), nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::CorruptRecord, "manifest is not JSON");
  try {
    Manifest m;
    m.percentile = j.at("percentile").get<double>();
    m.key = j.at("key").get<std::string>();
    m.kept = j.at("kept").get<std::vector<std::string>>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptRecord, e.what());
  }
}

}  // namespace teleop::datapipe

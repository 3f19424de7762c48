#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "teleop/core/record.hpp"

namespace teleop::datapipe {

inline constexpr std::string_view kRecordExtension = ".demo";

// A record file is UTF-8 JSON lines with lexicographically sorted keys and
// shortest round-trip number formatting:
//   line 1      {"kind":"header", ...RecordHeader, "schema":1}
//   lines 2..n  {"kind":"row", ...TickRow}
//   last line   {"kind":"footer", outcome, reset_count, dropped_commands,
//                rows, latency, report}
// A file without a footer line is a partial (crashed) write.

std::string header_line(const RecordHeader& h);
std::string row_line(const TickRow& row);
std::string footer_line(const DemonstrationRecord& rec);

/// The complete canonical text of a sealed record.
std::string serialize(const DemonstrationRecord& rec);

/// Throws Error(CorruptRecord) for malformed text, an unknown schema, a
/// missing footer or a row count that disagrees with the footer.
DemonstrationRecord parse_record(std::string_view text);

DemonstrationRecord read_record(const std::filesystem::path& path);
void write_record(const std::filesystem::path& path, const DemonstrationRecord& rec);

std::filesystem::path record_path(const std::filesystem::path& dir, const std::string& demo_id);

std::string serialize_report(const metrics::MetricReport& r);
metrics::MetricReport parse_report(std::string_view json);

}  // namespace teleop::datapipe

#pragma once

#include <cstdio>
#include <filesystem>
#include <optional>
#include <vector>

#include "teleop/core/record.hpp"

namespace teleop::datapipe {

/// Streams one demonstration to <dir>/<demo_id>.demo. The file holds an
/// exclusive advisory lock until finalize(), so scanners can tell an active
/// write from a crashed one.
class DemoWriter {
 public:
  DemoWriter(const std::filesystem::path& dir, RecordHeader header);
  ~DemoWriter();

  DemoWriter(const DemoWriter&) = delete;
  DemoWriter& operator=(const DemoWriter&) = delete;

  /// Throws Error(OutOfOrderTick) unless row.tick exceeds the previous tick.
  void log_tick(const TickRow& row);
  void add_latency(const LatencySample& s) { latency_.push_back(s); }
  void count_dropped() { ++dropped_; }

  /// Seals the record: attaches the metric report (none for a record without
  /// rows), writes the footer and releases the lock.
  DemonstrationRecord finalize(Outcome outcome, std::int64_t reset_count);

  [[nodiscard]] const RecordHeader& header() const { return header_; }
  [[nodiscard]] std::size_t rows() const { return rows_.size(); }
  [[nodiscard]] bool sealed() const { return file_ == nullptr; }
  [[nodiscard]] const std::filesystem::path& path() const { return path_; }

  /// Deletes the unsealed file.
  void discard();

  /// Drops the file handle without a footer, as a crash would.
  void abandon_for_test();

 private:
  void write_line(const std::string& s);

  RecordHeader header_;
  std::filesystem::path path_;
  std::FILE* file_ = nullptr;
  std::vector<TickRow> rows_;
  std::vector<LatencySample> latency_;
  std::uint64_t dropped_ = 0;
};

struct ScanResult {
  std::vector<std::filesystem::path> sealed;
  std::vector<std::filesystem::path> quarantined;  // new locations
  std::vector<std::filesystem::path> in_progress;  // locked by a live writer
};

inline constexpr std::string_view kQuarantineDir = "quarantine";

/// Classifies every record file in `dir`. Unlocked files that do not parse
/// as sealed records move to <dir>/quarantine/.
ScanResult scan(const std::filesystem::path& dir);

}  // namespace teleop::datapipe

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "teleop/core/event.hpp"
#include "teleop/core/pose_command.hpp"
#include "teleop/geometry/pose.hpp"
#include "teleop/metrics/report.hpp"

namespace teleop {

inline constexpr int kRecordSchemaVersion = 1;

enum class Outcome { success, failure, abandoned };

std::string_view to_string(Outcome o);
std::optional<Outcome> outcome_from_string(std::string_view s);

/// Metadata needed to identify and replay a demonstration.
struct RecordHeader {
  int schema = kRecordSchemaVersion;
  std::string demo_id;
  std::string task;
  std::string instance;
  std::string session;
  std::string device;
  std::uint64_t seed = 0;
  std::uint32_t n_envs = 1;
  std::uint32_t env_index = 0;
  std::uint64_t episode = 0;  // env episode counter at demo start
  double clock_offset = 0.0;  // s, server minus client, at demo start
  double tick_period = 0.05;  // s

  friend bool operator==(const RecordHeader&, const RecordHeader&) = default;
};

/// One simulated tick of the episode. `command` is the action the simulator
/// consumed on this tick, if any.
struct TickRow {
  std::uint64_t tick = 0;
  double t_server = 0.0;
  std::optional<PoseCommand> command;
  geometry::Pose effector;
  bool gripper_closed = false;
  std::vector<Event> events;

  [[nodiscard]] bool has_event(EventKind kind) const {
    for (const auto& e : events) {
      if (e.kind == kind) return true;
    }
    return false;
  }

  friend bool operator==(const TickRow&, const TickRow&) = default;
};

struct LatencySample {
  std::uint64_t seq = 0;
  double client_send = 0.0;     // client clock, s
  double server_receive = 0.0;  // server clock, s
  double clock_offset = 0.0;    // s, server minus client

  [[nodiscard]] double corrected() const { return server_receive - (client_send + clock_offset); }

  friend bool operator==(const LatencySample&, const LatencySample&) = default;
};

struct DemonstrationRecord {
  RecordHeader header;
  std::vector<TickRow> rows;
  Outcome outcome = Outcome::abandoned;
  std::int64_t reset_count = 0;
  std::uint64_t dropped_commands = 0;
  std::vector<LatencySample> latency;
  std::optional<metrics::MetricReport> report;

  friend bool operator==(const DemonstrationRecord&, const DemonstrationRecord&) = default;
};

}  // namespace teleop

#pragma once

#include <cstdint>
#include <string>

namespace teleop::metrics {

struct LatencyStats {
  double median = 0.0;  // seconds
  double p95 = 0.0;     // seconds

  friend bool operator==(const LatencyStats&, const LatencyStats&) = default;
};

/// Every demonstration-quality quantity for one demo.
struct MetricReport {
  std::string demo_id;
  std::string task;
  double completion_time = 0.0;     // s
  double d_trans = 0.0;             // m
  double d_rot = 0.0;               // rad
  double j_trans = 0.0;             // m/s^2
  double j_rot = 0.0;               // rad/s^2
  double server_loop_jitter = 0.0;  // s
  double client_loop_jitter = 0.0;  // s
  LatencyStats latency;
  std::int64_t reset_count = 0;
  bool success = false;

  // Set when the demo was too short for the jitter window or had no commands;
  // the affected values are reported as 0 instead of rejecting the demo.
  bool jitter_undefined = false;
  bool no_commands = false;

  friend bool operator==(const MetricReport&, const MetricReport&) = default;
};

}  // namespace teleop::metrics

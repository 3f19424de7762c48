#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "teleop/loadharness/client.hpp"

namespace teleop::loadharness {

struct WorkloadProfile {
  std::size_t clients = 1;
  double send_hz = 20.0;
  MotionKind motion = MotionKind::scripted;
  double duration = 60.0;  // s
  LinkParams link;
  std::uint64_t seed = 1;
  std::optional<std::string> task;  // routing hint when the target is a gateway
  std::string token{protocol::kDefaultToken};
  /// Emulated clients bind 127.0.0.<first_host + i> so each gets its own
  /// gateway rate-limit bucket.
  int first_host = 10;

  /// Throws std::invalid_argument on a violated invariant.
  void validate() const;
};

struct Target {
  net::Endpoint entry;                  // instance or gateway
  std::vector<net::Endpoint> instances;  // queried for stats; defaults to {entry}
};

/// One row of the scaling report.
struct ScalingRow {
  std::size_t n_clients = 0;
  double ack_latency_median = 0.0;    // ms, ingress only
  double ack_latency_p95 = 0.0;
  double frame_latency_median = 0.0;  // ms, command to first frame showing it
  double frame_latency_p95 = 0.0;
  double sim_step_median = 0.0;       // ms, compute per tick
  double sim_step_p95 = 0.0;
  double tick_period_median = 0.0;    // ms
  double loop_jitter = 0.0;           // ms
  double fps_mean = 0.0;              // per stream
  double fps_min = 0.0;
  double command_rate_mean = 0.0;     // Hz per client
  double command_rate_min = 0.0;
  std::uint64_t dropped_sessions = 0;
  std::uint64_t failed_clients = 0;
  std::uint64_t successes = 0;
  std::uint64_t demos_sealed = 0;
  double rss_mb = 0.0;                // peak resident set of this process
  std::vector<std::uint32_t> instance_live;  // sampled mid-run
  std::vector<ClientResult> clients;
};

/// Spawns the clients, drives them for the profile's duration and merges
/// their samples with the instances' introspection counters. Throws
/// Error(TargetUnreachable) when an instance does not answer.
ScalingRow run(const WorkloadProfile& profile, const Target& target);

/// Delimited table, one row per concurrency level.
void write_report(std::ostream& os, const std::vector<ScalingRow>& rows, char delimiter = ',');

double resident_set_mb();

}  // namespace teleop::loadharness

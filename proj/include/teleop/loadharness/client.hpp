#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "teleop/loadharness/link.hpp"
#include "teleop/loadharness/motion.hpp"
#include "teleop/net/socket.hpp"
#include "teleop/session/client.hpp"

namespace teleop::loadharness {

struct ClientConfig {
  net::Endpoint target;
  session::ClientOptions options;
  double send_hz = 20.0;
  double duration = 60.0;  // s
  MotionKind motion = MotionKind::scripted;
  LinkParams link;
  std::uint64_t seed = 1;
  std::chrono::milliseconds ping_period{2000};
  /// Delay of the first pose after the first frame arrives.
  std::chrono::milliseconds send_phase{5};
  /// Ends the run early when set.
  const std::atomic<bool>* stop = nullptr;
};

struct ClientResult {
  bool connected = false;
  bool clean_exit = false;
  std::optional<std::string> error;
  std::string session;
  std::string instance;
  std::uint32_t env = 0;
  double clock_offset_ms = 0.0;
  double elapsed = 0.0;  // s, first pose to last receive
  std::uint64_t poses_sent = 0;
  std::uint64_t planned = 0;  // poses computed from a fresh scene (the rest hold)
  std::uint64_t acks = 0;
  std::uint64_t frames = 0;
  std::uint64_t successes = 0;
  std::vector<double> ack_latency_ms;    // server receive minus offset-corrected send time
  std::vector<double> frame_latency_ms;  // send to first frame reflecting the command, client clock

  [[nodiscard]] double command_rate() const { return elapsed > 0 ? poses_sent / elapsed : 0.0; }
  [[nodiscard]] double fps() const { return elapsed > 0 ? frames / elapsed : 0.0; }
};

/// One simulated operator: connects, streams poses at send_hz for `duration`,
/// consumes frames and events, then says bye. A new action is planned only
/// once the previous planned command shows up in a frame; in between the
/// client sends holds so the command rate stays fixed.
ClientResult run_client(const ClientConfig& config);

}  // namespace teleop::loadharness

#pragma once

// Line-delimited JSON control protocol shared by clients, session servers
// and the gateway. Timestamps on the wire are milliseconds (decimals);
// unknown fields are ignored.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "teleop/core/errors.hpp"

namespace teleop::protocol {

inline constexpr int kProtocolVersion = 1;
inline constexpr int kFrameSchema = 1;
inline constexpr std::string_view kDefaultToken = "teleop-dev";

// --- client to server -------------------------------------------------------

struct Hello {
  int protocol = kProtocolVersion;
  std::string device = "sim";
  std::string token;
  std::optional<std::string> task;  // gateway routing hint
  friend bool operator==(const Hello&, const Hello&) = default;
};

/// t1_prev is the client receive time of the previous pong; together with
/// that pong's t0 and t_server it completes one (t0, t_server, t1) exchange.
struct Ping {
  std::uint64_t seq = 0;
  double t0 = 0.0;  // ms, client clock
  std::optional<double> t1_prev;
  friend bool operator==(const Ping&, const Ping&) = default;
};

struct Pose {
  std::uint64_t seq = 0;
  double t_client = 0.0;  // ms, client clock
  std::array<double, 3> dpos{};
  std::array<double, 4> drot{1.0, 0.0, 0.0, 0.0};  // w, x, y, z
  bool gripper = false;  // true = closed
  friend bool operator==(const Pose&, const Pose&) = default;
};

struct Reset {
  friend bool operator==(const Reset&, const Reset&) = default;
};
struct Bye {
  friend bool operator==(const Bye&, const Bye&) = default;
};

/// Introspection query; `reset` clears the accumulated tick statistics.
struct StatsRequest {
  std::string token;
  bool reset = false;
  friend bool operator==(const StatsRequest&, const StatsRequest&) = default;
};

// Instance to gateway.
struct Register {
  std::string instance;
  std::string address;
  std::string task;
  std::uint32_t capacity = 4;
  std::uint32_t live = 0;
  friend bool operator==(const Register&, const Register&) = default;
};
struct Heartbeat {
  std::string instance;
  std::uint32_t live = 0;
  friend bool operator==(const Heartbeat&, const Heartbeat&) = default;
};
/// A session on the instance ended; returns one gateway reservation.
struct Release {
  std::string instance;
  friend bool operator==(const Release&, const Release&) = default;
};

using ClientMessage = std::variant<Hello, Ping, Pose, Reset, Bye, StatsRequest, Register, Heartbeat, Release>;

// --- server to client -------------------------------------------------------

struct Welcome {
  std::string session;
  std::uint32_t env = 0;
  std::string task;
  int tick_hz = 20;
  int schema = kFrameSchema;
  double clock_offset = 0.0;  // ms, server minus client
  std::string instance;
  friend bool operator==(const Welcome&, const Welcome&) = default;
};

struct Pong {
  std::uint64_t seq = 0;
  double t0 = 0.0;
  double t_server = 0.0;
  friend bool operator==(const Pong&, const Pong&) = default;
};

struct Ack {
  std::uint64_t seq = 0;
  double t_server = 0.0;
  friend bool operator==(const Ack&, const Ack&) = default;
};

struct EventNotice {
  std::string kind;  // success | reset | timeout | expired
  friend bool operator==(const EventNotice&, const EventNotice&) = default;
};

struct Err {
  std::string code;
  std::string detail;
  friend bool operator==(const Err&, const Err&) = default;
};

struct Redirect {
  std::string address;
  std::string instance;
  friend bool operator==(const Redirect&, const Redirect&) = default;
};

struct StatsReply {
  std::string instance;
  std::string task;
  double tick_period_median = 0.0;  // ms
  double sim_step_median = 0.0;     // ms, compute time per tick
  double sim_step_p95 = 0.0;        // ms
  double server_loop_jitter = 0.0;  // ms
  std::uint64_t ticks = 0;
  std::uint32_t live_sessions = 0;
  std::uint32_t capacity = 0;
  std::uint64_t sessions_started = 0;
  std::uint64_t dropped_sessions = 0;
  std::uint64_t demos_sealed = 0;
  friend bool operator==(const StatsReply&, const StatsReply&) = default;
};

using ServerMessage = std::variant<Welcome, Pong, Ack, EventNotice, Err, Redirect, StatsReply>;

std::string encode(const ClientMessage& m);
std::string encode(const ServerMessage& m);

/// Throws Error(MalformedMessage) for invalid JSON or fields and
/// Error(UnknownMessageType) for an unrecognised `type`.
ClientMessage parse_client(std::string_view text);
ServerMessage parse_server(std::string_view text);

Err make_err(ErrorCode code, std::string detail);

}  // namespace teleop::protocol

#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "teleop/core/pose_command.hpp"
#include "teleop/protocol/messages.hpp"

namespace teleop::session {

struct Session {
  std::string id;
  std::string device;
  std::string instance;
  std::uint32_t env = 0;
  double clock_offset = 0.0;  // s, server minus client
  double last_seen = 0.0;     // server clock, s
  std::optional<std::uint64_t> command_seq_high;
  std::uint64_t dropped = 0;
  std::uint64_t accepted = 0;
};

/// Sequence rule for incoming commands: accepted iff strictly above the
/// high-water mark. Stale commands only bump the drop counter.
bool accept_sequence(Session& s, std::uint64_t seq);

/// Wire pose (ms timestamps) to a store command (s timestamps).
PoseCommand to_command(const protocol::Pose& p, double t_receive, double clock_offset);

/// Live sessions of one instance. Thread-safe.
class SessionRegistry {
 public:
  /// Throws std::logic_error on a duplicate id.
  void add(Session s);
  bool remove(const std::string& id);
  void touch(const std::string& id, double now);
  void set_clock_offset(const std::string& id, double offset);

  /// Applies accept_sequence to the stored session. False also for unknown ids.
  bool accept(const std::string& id, std::uint64_t seq, double now);

  /// Removes and returns every session idle for more than `idle` seconds.
  std::vector<std::string> expire(double now, double idle);

  [[nodiscard]] std::optional<Session> get(const std::string& id) const;
  [[nodiscard]] std::vector<Session> list() const;
  [[nodiscard]] std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, Session> sessions_;
};

}  // namespace teleop::session

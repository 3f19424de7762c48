#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace teleop::gateway {

inline constexpr double kHeartbeatStaleAfter = 3.0;  // s

struct InstanceRecord {
  std::string id;
  std::string address;
  std::string task;
  std::uint32_t capacity = 4;
  std::uint32_t live = 0;
  std::uint32_t reserved = 0;  // routed minus released
  double last_heartbeat = 0.0;

  /// Sessions counted against capacity: an instance's own report and the
  /// gateway's outstanding routes each bound the true load from below.
  [[nodiscard]] std::uint32_t load() const { return live > reserved ? live : reserved; }
};

/// Instances known to the gateway. All members are linearizable; `now` is
/// passed in so that timelines can be scripted.
class RoutingTable {
 public:
  explicit RoutingTable(double stale_after = kHeartbeatStaleAfter) : stale_after_(stale_after) {}

  /// Adds or replaces an instance; counts as a heartbeat.
  void register_instance(const InstanceRecord& rec, double now);

  /// Throws Error(UnknownInstance).
  void heartbeat(const std::string& id, std::uint32_t live, double now);

  /// Least-loaded fresh instance serving `task` (any task when empty) with
  /// load below capacity; ties go to the lowest id. Reserves one session on
  /// it. Throws Error(NoInstance).
  InstanceRecord route(const std::string& task, double now);

  /// Returns one reservation. Throws Error(UnknownInstance).
  void release(const std::string& id);

  /// True when some fresh instance serves `task`, full or not.
  [[nodiscard]] bool serves(const std::string& task, double now) const;
  [[nodiscard]] std::vector<InstanceRecord> instances() const;
  [[nodiscard]] std::uint64_t routed() const;
  [[nodiscard]] std::uint64_t released() const;

 private:
  [[nodiscard]] bool fresh(const InstanceRecord& r, double now) const { return now - r.last_heartbeat <= stale_after_; }

  const double stale_after_;
  mutable std::mutex mu_;
  std::map<std::string, InstanceRecord> instances_;
  std::uint64_t routed_ = 0;
  std::uint64_t released_ = 0;
};

struct BucketParams {
  double burst = 5.0;
  double refill_per_second = 1.0;
};

/// Token bucket per client address.
class RateLimiter {
 public:
  explicit RateLimiter(BucketParams params = {}) : params_(params) {}

  bool allow(const std::string& address, double now);

 private:
  struct Bucket {
    double tokens = 0.0;
    double updated = 0.0;
  };

  BucketParams params_;
  std::mutex mu_;
  std::map<std::string, Bucket> buckets_;
};

}  // namespace teleop::gateway

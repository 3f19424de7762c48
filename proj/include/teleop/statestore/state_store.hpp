#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>

#include "teleop/core/bytes.hpp"
#include "teleop/core/pose_command.hpp"
#include "teleop/statestore/ring_buffer.hpp"

namespace teleop::statestore {

inline constexpr std::size_t kMaxPayloadBytes = 1u << 20;
inline constexpr std::size_t kSubscriberQueueDepth = 128;

// Channel naming convention shared by every service.
//   cmd:<session>   accepted pose commands (encode_pose_command payloads)
//   ctl:<session>   control requests from the client ("reset")
//   evt:<session>   task events for the client (event kind names)
//   frame:<env>     per-environment frame ring
std::string command_channel(std::string_view session);
std::string control_channel(std::string_view session);
std::string event_channel(std::string_view session);
std::string frame_ring_name(std::uint32_t env_index);

struct Message {
  std::uint64_t seq = 0;
  std::shared_ptr<const Bytes> payload;
};

/// `count` messages were discarded from this subscriber's queue because it
/// fell more than kSubscriberQueueDepth messages behind.
struct Lagged {
  std::uint64_t count = 0;
};

/// The subscription was cancelled.
struct Closed {};

using Delivery = std::variant<Message, Lagged, Closed>;

namespace detail {
struct SubscriberQueue;
struct Channel;
}  // namespace detail

/// Receives messages published on one channel after the subscription was
/// created, in publish order. Unsubscribes on destruction.
class Subscription {
 public:
  Subscription() = default;
  Subscription(std::shared_ptr<detail::Channel> channel, std::shared_ptr<detail::SubscriberQueue> queue,
               std::string name);
  Subscription(Subscription&&) noexcept = default;
  Subscription& operator=(Subscription&&) noexcept;
  Subscription(const Subscription&) = delete;
  Subscription& operator=(const Subscription&) = delete;
  ~Subscription();

  /// Blocks until a delivery is available or the subscription is cancelled.
  Delivery next();

  /// Like next() but gives up after `timeout`.
  std::optional<Delivery> next_for(std::chrono::milliseconds timeout);

  /// Non-blocking.
  std::optional<Delivery> poll();

  /// Wakes a blocked next(); every later call returns Closed. Safe to call
  /// from any thread.
  void cancel();

  [[nodiscard]] const std::string& channel() const { return name_; }
  [[nodiscard]] bool valid() const { return queue_ != nullptr; }

 private:
  void detach();

  std::shared_ptr<detail::Channel> channel_;
  std::shared_ptr<detail::SubscriberQueue> queue_;
  std::string name_;
};

/// In-process message store: pub/sub channels with per-subscriber bounded
/// queues, last-value reads, a key-value map and named frame rings. All
/// members are thread-safe.
class StateStore {
 public:
  StateStore();
  ~StateStore();

  StateStore(const StateStore&) = delete;
  StateStore& operator=(const StateStore&) = delete;

  /// Throws Error(PayloadTooLarge) above kMaxPayloadBytes.
  std::uint64_t publish(std::string_view channel, Bytes payload);

  Subscription subscribe(std::string_view channel);

  /// Most recent message on a channel, if any was ever published.
  [[nodiscard]] std::optional<Message> latest(std::string_view channel) const;

  /// Most recent command published on cmd:<session>.
  [[nodiscard]] std::optional<PoseCommand> latest_pose(std::string_view session) const;

  /// Forgets a channel's last value and cancels its subscribers.
  void drop_channel(std::string_view channel);

  void set(std::string_view key, Bytes value);
  [[nodiscard]] std::optional<Bytes> get(std::string_view key) const;
  bool erase(std::string_view key);

  /// Returns the ring with this name, creating it with `capacity` if absent.
  std::shared_ptr<FrameRing> ring(std::string_view name, std::size_t capacity = kDefaultRingCapacity);
  std::uint64_t ring_put(std::string_view name, Bytes frame);
  [[nodiscard]] std::optional<RingEntry> ring_latest(std::string_view name) const;

  [[nodiscard]] std::size_t channel_count() const;

 private:
  std::shared_ptr<detail::Channel> find_channel(std::string_view name) const;
  std::shared_ptr<detail::Channel> channel(std::string_view name);

  mutable std::shared_mutex mu_;
  std::map<std::string, std::shared_ptr<detail::Channel>, std::less<>> channels_;
  std::map<std::string, std::shared_ptr<FrameRing>, std::less<>> rings_;

  mutable std::mutex kv_mu_;
  std::map<std::string, Bytes, std::less<>> kv_;
};

}  // namespace teleop::statestore

#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "teleop/core/bytes.hpp"

namespace teleop::statestore {

inline constexpr std::size_t kDefaultRingCapacity = 4;

struct RingEntry {
  std::uint64_t seq = 0;
  std::shared_ptr<const Bytes> frame;
};

/// Fixed-capacity frame buffer with drop-oldest overwrite. put() never
/// blocks on readers; readers only ever see whole frames.
class FrameRing {
 public:
  explicit FrameRing(std::size_t capacity = kDefaultRingCapacity);

  FrameRing(const FrameRing&) = delete;
  FrameRing& operator=(const FrameRing&) = delete;

  /// Appends a non-empty frame and returns its sequence number (1-based).
  std::uint64_t put(Bytes frame);

  [[nodiscard]] std::optional<RingEntry> latest() const;

  /// Blocks until a frame with seq > after_seq exists, the timeout elapses or
  /// the ring is closed. Returns the newest frame in the first case.
  [[nodiscard]] std::optional<RingEntry> wait_newer(std::uint64_t after_seq,
                                                    std::chrono::milliseconds timeout) const;

  /// Held frames, oldest first.
  [[nodiscard]] std::vector<RingEntry> contents() const;

  [[nodiscard]] std::size_t capacity() const { return capacity_; }
  [[nodiscard]] std::size_t size() const;
  [[nodiscard]] std::uint64_t total_puts() const;

  /// Wakes every waiter; later waits return immediately.
  void close();

 private:
  const std::size_t capacity_;
  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  std::deque<RingEntry> slots_;
  std::uint64_t next_seq_ = 1;
  bool closed_ = false;
};

}  // namespace teleop::statestore

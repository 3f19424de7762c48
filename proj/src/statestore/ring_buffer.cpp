#include "teleop/statestore/ring_buffer.hpp"

#include <stdexcept>

namespace teleop::statestore {

FrameRing::FrameRing(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw std::invalid_argument("ring capacity must be positive");
}

std::uint64_t FrameRing::put(Bytes frame) {
  if (frame.empty()) throw std::invalid_argument("ring frames must be non-empty");
  auto shared = std::make_shared<const Bytes>(std::move(frame));
  std::uint64_t seq;
  {
    std::lock_guard lock(mu_);
    seq = next_seq_++;
    slots_.push_back({seq, std::move(shared)});
    while (slots_.size() > capacity_) slots_.pop_front();
  }
  cv_.notify_all();
  return seq;
}

std::optional<RingEntry> FrameRing::latest() const {
  std::lock_guard lock(mu_);
  if (slots_.empty()) return std::nullopt;
  return slots_.back();
}

std::optional<RingEntry> FrameRing::wait_newer(std::uint64_t after_seq,
                                               std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mu_);
  const bool ready = cv_.wait_for(lock, timeout, [&] {
    return closed_ || (!slots_.empty() && slots_.back().seq > after_seq);
  });
  if (!ready || slots_.empty() || slots_.back().seq <= after_seq) return std::nullopt;
  return slots_.back();
}

std::vector<RingEntry> FrameRing::contents() const {
  std::lock_guard lock(mu_);
  return {slots_.begin(), slots_.end()};
}

std::size_t FrameRing::size() const {
  std::lock_guard lock(mu_);
  return slots_.size();
}

std::uint64_t FrameRing::total_puts() const {
  std::lock_guard lock(mu_);
  return next_seq_ - 1;
}

void FrameRing::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

}  // namespace teleop::statestore

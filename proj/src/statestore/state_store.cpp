#include "teleop/statestore/state_store.hpp"

#include <algorithm>
#include <condition_variable>
#include <deque>
#include <vector>

#include "teleop/core/errors.hpp"

namespace teleop::statestore {

std::string command_channel(std::string_view session) { return "cmd:" + std::string(session); }
std::string control_channel(std::string_view session) { return "ctl:" + std::string(session); }
std::string event_channel(std::string_view session) { return "evt:" + std::string(session); }
std::string frame_ring_name(std::uint32_t env_index) { return "frame:" + std::to_string(env_index); }

namespace detail {

struct SubscriberQueue {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<Message> queue;
  std::uint64_t lagged = 0;
  bool cancelled = false;

  void push(const Message& m) {
    {
      std::lock_guard lock(mu);
      if (cancelled) return;
      if (queue.size() >= kSubscriberQueueDepth) {
        queue.pop_front();
        ++lagged;
      }
      queue.push_back(m);
    }
    cv.notify_one();
  }

  // Caller holds `mu`.
  std::optional<Delivery> take_locked() {
    if (lagged > 0) {
      const Lagged l{lagged};
      lagged = 0;
      return l;
    }
    if (!queue.empty()) {
      Message m = std::move(queue.front());
      queue.pop_front();
      return m;
    }
    if (cancelled) return Closed{};
    return std::nullopt;
  }

  void cancel() {
    {
      std::lock_guard lock(mu);
      cancelled = true;
      queue.clear();
      lagged = 0;
    }
    cv.notify_all();
  }
};

struct Channel {
  std::mutex mu;
  std::uint64_t next_seq = 1;
  std::optional<Message> latest;
  std::vector<std::weak_ptr<SubscriberQueue>> subscribers;
};

}  // namespace detail

using detail::Channel;
using detail::SubscriberQueue;

// --- Subscription -----------------------------------------------------------

Subscription::Subscription(std::shared_ptr<Channel> channel, std::shared_ptr<SubscriberQueue> queue,
                           std::string name)
    : channel_(std::move(channel)), queue_(std::move(queue)), name_(std::move(name)) {}

Subscription& Subscription::operator=(Subscription&& other) noexcept {
  if (this != &other) {
    detach();
    channel_ = std::move(other.channel_);
    queue_ = std::move(other.queue_);
    name_ = std::move(other.name_);
  }
  return *this;
}

Subscription::~Subscription() { detach(); }

void Subscription::detach() {
  if (!queue_) return;
  queue_->cancel();
  if (channel_) {
    std::lock_guard lock(channel_->mu);
    auto& subs = channel_->subscribers;
    std::erase_if(subs, [&](const std::weak_ptr<SubscriberQueue>& w) {
      auto p = w.lock();
      return !p || p == queue_;
    });
  }
  queue_.reset();
  channel_.reset();
}

Delivery Subscription::next() {
  if (!queue_) return Closed{};
  std::unique_lock lock(queue_->mu);
  std::optional<Delivery> d;
  queue_->cv.wait(lock, [&] { return (d = queue_->take_locked()).has_value(); });
  return *d;
}

std::optional<Delivery> Subscription::next_for(std::chrono::milliseconds timeout) {
  if (!queue_) return Closed{};
  std::unique_lock lock(queue_->mu);
  std::optional<Delivery> d;
  queue_->cv.wait_for(lock, timeout, [&] { return (d = queue_->take_locked()).has_value(); });
  return d;
}

std::optional<Delivery> Subscription::poll() {
  if (!queue_) return Closed{};
  std::lock_guard lock(queue_->mu);
  return queue_->take_locked();
}

void Subscription::cancel() {
  if (queue_) queue_->cancel();
}

// --- StateStore -------------------------------------------------------------

StateStore::StateStore() = default;

StateStore::~StateStore() {
  std::unique_lock lock(mu_);
  for (auto& [name, ch] : channels_) {
    std::lock_guard cl(ch->mu);
    for (auto& w : ch->subscribers) {
      if (auto q = w.lock()) q->cancel();
    }
  }
  for (auto& [name, ring] : rings_) ring->close();
}

std::shared_ptr<Channel> StateStore::find_channel(std::string_view name) const {
  std::shared_lock lock(mu_);
  auto it = channels_.find(name);
  return it == channels_.end() ? nullptr : it->second;
}

std::shared_ptr<Channel> StateStore::channel(std::string_view name) {
  if (auto ch = find_channel(name)) return ch;
  std::unique_lock lock(mu_);
  auto [it, inserted] = channels_.try_emplace(std::string(name), nullptr);
  if (inserted) it->second = std::make_shared<Channel>();
  return it->second;
}

std::uint64_t StateStore::publish(std::string_view name, Bytes payload) {
  if (payload.size() > kMaxPayloadBytes) {
    throw Error(ErrorCode::PayloadTooLarge,
                "payload of " + std::to_string(payload.size()) + " bytes on " + std::string(name));
  }
  auto ch = channel(name);
  auto shared = std::make_shared<const Bytes>(std::move(payload));
  std::lock_guard lock(ch->mu);
  const Message m{ch->next_seq++, std::move(shared)};
  ch->latest = m;
  // Delivering under the channel lock is what makes every subscriber observe
  // the same total order.
  bool expired = false;
  for (auto& w : ch->subscribers) {
    if (auto q = w.lock()) {
      q->push(m);
    } else {
      expired = true;
    }
  }
  if (expired) std::erase_if(ch->subscribers, [](const auto& w) { return w.expired(); });
  return m.seq;
}

Subscription StateStore::subscribe(std::string_view name) {
  auto ch = channel(name);
  auto q = std::make_shared<SubscriberQueue>();
  {
    std::lock_guard lock(ch->mu);
    ch->subscribers.push_back(q);
  }
  return Subscription(std::move(ch), std::move(q), std::string(name));
}

std::optional<Message> StateStore::latest(std::string_view name) const {
  auto ch = find_channel(name);
  if (!ch) return std::nullopt;
  std::lock_guard lock(ch->mu);
  return ch->latest;
}

std::optional<PoseCommand> StateStore::latest_pose(std::string_view session) const {
  auto m = latest(command_channel(session));
  if (!m) return std::nullopt;
  return decode_pose_command(*m->payload);
}

void StateStore::drop_channel(std::string_view name) {
  std::shared_ptr<Channel> ch;
  {
    std::unique_lock lock(mu_);
    auto it = channels_.find(name);
    if (it == channels_.end()) return;
    ch = it->second;
    channels_.erase(it);
  }
  std::lock_guard lock(ch->mu);
  ch->latest.reset();
  for (auto& w : ch->subscribers) {
    if (auto q = w.lock()) q->cancel();
  }
}

void StateStore::set(std::string_view key, Bytes value) {
  std::lock_guard lock(kv_mu_);
  kv_.insert_or_assign(std::string(key), std::move(value));
}

std::optional<Bytes> StateStore::get(std::string_view key) const {
  std::lock_guard lock(kv_mu_);
  auto it = kv_.find(key);
  if (it == kv_.end()) return std::nullopt;
  return it->second;
}

bool StateStore::erase(std::string_view key) {
  std::lock_guard lock(kv_mu_);
  auto it = kv_.find(key);
  if (it == kv_.end()) return false;
  kv_.erase(it);
  return true;
}

std::shared_ptr<FrameRing> StateStore::ring(std::string_view name, std::size_t capacity) {
  {
    std::shared_lock lock(mu_);
    auto it = rings_.find(name);
    if (it != rings_.end()) return it->second;
  }
  std::unique_lock lock(mu_);
  auto [it, inserted] = rings_.try_emplace(std::string(name), nullptr);
  if (inserted) it->second = std::make_shared<FrameRing>(capacity);
  return it->second;
}

std::uint64_t StateStore::ring_put(std::string_view name, Bytes frame) {
  return ring(name)->put(std::move(frame));
}

std::optional<RingEntry> StateStore::ring_latest(std::string_view name) const {
  std::shared_lock lock(mu_);
  auto it = rings_.find(name);
  if (it == rings_.end()) return std::nullopt;
  return it->second->latest();
}

std::size_t StateStore::channel_count() const {
  std::shared_lock lock(mu_);
  return channels_.size();
}

}  // namespace teleop::statestore

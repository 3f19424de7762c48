#pragma once

#include <map>
#include <mutex>
#include <set>

#include "teleop/session/server.hpp"

namespace teleop::testing {

/// Backend with a fixed number of environments and no simulation.
class FakeBackend : public session::SessionBackend {
 public:
  explicit FakeBackend(std::size_t capacity) : capacity_(capacity) {}

  std::optional<std::uint32_t> open_session(const session::SessionInfo& info) override {
    std::lock_guard lock(mu_);
    for (std::uint32_t i = 0; i < capacity_; ++i) {
      if (!used_.count(i)) {
        used_.insert(i);
        env_of_[info.id] = i;
        infos_[info.id] = info;
        return i;
      }
    }
    return std::nullopt;
  }

  void close_session(const std::string& id, Outcome outcome) override {
    std::lock_guard lock(mu_);
    if (auto it = env_of_.find(id); it != env_of_.end()) {
      used_.erase(it->second);
      env_of_.erase(it);
    }
    outcomes_[id] = outcome;
  }

  void command_dropped(const std::string& id) override {
    std::lock_guard lock(mu_);
    ++dropped_[id];
  }

  [[nodiscard]] std::string task_name() const override { return "lift"; }
  [[nodiscard]] std::size_t capacity() const override { return capacity_; }
  protocol::StatsReply stats(bool) override {
    protocol::StatsReply r;
    r.tick_period_median = 50.0;
    return r;
  }

  std::size_t assigned() const {
    std::lock_guard lock(mu_);
    return used_.size();
  }
  std::optional<Outcome> outcome(const std::string& id) const {
    std::lock_guard lock(mu_);
    auto it = outcomes_.find(id);
    if (it == outcomes_.end()) return std::nullopt;
    return it->second;
  }
  std::uint64_t dropped(const std::string& id) const {
    std::lock_guard lock(mu_);
    auto it = dropped_.find(id);
    return it == dropped_.end() ? 0 : it->second;
  }
  std::optional<session::SessionInfo> info(const std::string& id) const {
    std::lock_guard lock(mu_);
    auto it = infos_.find(id);
    if (it == infos_.end()) return std::nullopt;
    return it->second;
  }

 private:
  const std::size_t capacity_;
  mutable std::mutex mu_;
  std::set<std::uint32_t> used_;
  std::map<std::string, std::uint32_t> env_of_;
  std::map<std::string, Outcome> outcomes_;
  std::map<std::string, std::uint64_t> dropped_;
  std::map<std::string, session::SessionInfo> infos_;
};

/// Polls `pred` until it holds or `timeout` elapses.
template <typename Pred>
bool eventually(Pred pred, std::chrono::milliseconds timeout = std::chrono::milliseconds(5000)) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (std::chrono::steady_clock::now() < deadline) {
    if (pred()) return true;
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  return pred();
}

}  // namespace teleop::testing

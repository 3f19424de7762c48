#pragma once

#include <atomic>
#include <chrono>
#include <deque>
#include <map>
#include <mutex>
#include <thread>

#include "teleop/media/codec.hpp"
#include "teleop/server/core.hpp"
#include "teleop/session/server.hpp"
#include "teleop/statestore/state_store.hpp"

namespace teleop::server {

/// Drives a TeleopCore at a fixed tick rate: drains command and control
/// channels, steps, logs, publishes task events to evt:<session> and one
/// frame per assigned environment.
class TeleopService : public session::SessionBackend {
 public:
  TeleopService(CoreConfig config, statestore::StateStore& store, media::Encoding encoding = media::Encoding::state_v1);
  ~TeleopService() override;

  void stop();

  std::optional<std::uint32_t> open_session(const session::SessionInfo& info) override;
  void close_session(const std::string& id, Outcome outcome) override;
  void command_dropped(const std::string& id) override;
  [[nodiscard]] std::string task_name() const override;
  [[nodiscard]] std::size_t capacity() const override;
  protocol::StatsReply stats(bool reset) override;

  [[nodiscard]] TeleopCore& core() { return core_; }

 private:
  struct Feed {
    std::uint32_t env = 0;
    statestore::Subscription commands;
    statestore::Subscription control;
  };

  void run();
  std::map<std::uint32_t, EnvInput> drain();

  TeleopCore core_;
  statestore::StateStore& store_;
  const media::Encoding encoding_;

  std::mutex feeds_mu_;
  std::map<std::string, Feed> feeds_;

  std::mutex stats_mu_;
  std::deque<double> periods_;  // s
  std::deque<double> compute_;  // s
  std::uint64_t ticks_ = 0;

  std::atomic<bool> stop_{false};
  std::thread driver_;
};

}  // namespace teleop::server

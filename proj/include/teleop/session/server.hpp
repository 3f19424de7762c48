#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <thread>

#include "teleop/core/record.hpp"
#include "teleop/net/server.hpp"
#include "teleop/protocol/messages.hpp"
#include "teleop/session/registry.hpp"
#include "teleop/statestore/state_store.hpp"

namespace teleop::session {

struct SessionInfo {
  std::string id;
  std::string device;
  double clock_offset = 0.0;  // s
};

/// What the connection layer needs from the simulation side.
class SessionBackend {
 public:
  virtual ~SessionBackend() = default;

  /// Reserves an environment; nullopt when none is free.
  virtual std::optional<std::uint32_t> open_session(const SessionInfo& info) = 0;
  /// Releases the environment and seals the open demonstration.
  virtual void close_session(const std::string& id, Outcome outcome) = 0;
  virtual void command_dropped(const std::string& id) = 0;

  [[nodiscard]] virtual std::string task_name() const = 0;
  [[nodiscard]] virtual std::size_t capacity() const = 0;
  /// Tick statistics; session counters are filled in by the server.
  virtual protocol::StatsReply stats(bool reset) = 0;
};

struct SessionServerConfig {
  net::Endpoint listen{"127.0.0.1", 0};
  std::string token{protocol::kDefaultToken};
  std::string instance = "local";
  double idle_timeout = 5.0;  // s
  std::chrono::milliseconds sweep_period{250};
  std::size_t malformed_limit = 10;
  double malformed_window = 10.0;  // s
  double resync_period = 30.0;     // s
  std::chrono::milliseconds handshake_timeout{5000};
  /// Runs after a session ended and its environment was released.
  std::function<void(const std::string&, Outcome)> on_session_end;
  /// Runs after a session was admitted.
  std::function<void(const std::string&)> on_session_start;
};

struct SessionCounters {
  std::uint64_t started = 0;
  std::uint64_t dropped = 0;  // abandoned by disconnect or expiry
  std::uint64_t expired = 0;
  std::uint64_t rejected = 0;
  std::uint64_t stale_commands = 0;
  std::uint64_t malformed = 0;
};

/// Client-facing endpoint: handshake, clock sync, pose ingest, event and
/// frame delivery, idle expiry, and the stats introspection query.
class SessionServer {
 public:
  SessionServer(SessionServerConfig config, SessionBackend& backend, statestore::StateStore& store);
  ~SessionServer();

  SessionServer(const SessionServer&) = delete;
  SessionServer& operator=(const SessionServer&) = delete;

  void stop();

  [[nodiscard]] net::Endpoint endpoint() const { return server_->endpoint(); }
  [[nodiscard]] std::size_t live_sessions() const { return registry_.size(); }
  [[nodiscard]] const SessionRegistry& registry() const { return registry_; }
  [[nodiscard]] SessionCounters counters() const;

  /// One expiry pass; normally driven by the sweep thread.
  std::vector<std::string> sweep(double now);

 private:
  struct Live;

  void handle(const std::shared_ptr<net::Connection>& conn);
  void serve_stats(net::Connection& conn, const protocol::StatsRequest& first);
  void run_session(const std::shared_ptr<net::Connection>& conn, const protocol::Hello& hello);
  std::optional<double> clock_sync(net::Connection& conn);
  std::string new_session_id();
  protocol::StatsReply stats(bool reset);
  void sweep_loop();
  void send(net::Connection& conn, const protocol::ServerMessage& m);

  SessionServerConfig config_;
  SessionBackend& backend_;
  statestore::StateStore& store_;
  SessionRegistry registry_;

  std::mutex mu_;
  std::map<std::string, std::shared_ptr<Live>> live_;
  std::mt19937_64 id_rng_;
  std::uint64_t id_counter_ = 0;

  std::atomic<std::uint64_t> started_{0}, dropped_{0}, expired_{0}, rejected_{0}, stale_{0}, malformed_{0};

  std::atomic<bool> stopping_{false};
  std::mutex sweep_mu_;
  std::condition_variable sweep_cv_;
  std::thread sweeper_;
  std::unique_ptr<net::ConnectionServer> server_;
};

}  // namespace teleop::session

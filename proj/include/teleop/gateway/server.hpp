#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "teleop/gateway/routing.hpp"
#include "teleop/net/server.hpp"
#include "teleop/protocol/messages.hpp"

namespace teleop::gateway {

struct GatewayConfig {
  net::Endpoint listen{"127.0.0.1", 0};
  BucketParams bucket;
  double stale_after = kHeartbeatStaleAfter;
};

struct GatewayCounters {
  std::uint64_t redirects = 0;
  std::uint64_t rate_limited = 0;
  std::uint64_t no_capacity = 0;
};

/// Front door: rate-limits hellos per client address and answers each with a
/// redirect to the least-loaded instance. Instances register, heartbeat and
/// release reservations over the same text protocol.
class GatewayServer {
 public:
  explicit GatewayServer(GatewayConfig config = {});
  ~GatewayServer();

  GatewayServer(const GatewayServer&) = delete;
  GatewayServer& operator=(const GatewayServer&) = delete;

  void stop();

  [[nodiscard]] net::Endpoint endpoint() const { return server_->endpoint(); }
  [[nodiscard]] RoutingTable& table() { return table_; }
  [[nodiscard]] GatewayCounters counters() const;

 private:
  void handle(const std::shared_ptr<net::Connection>& conn);
  void serve_instance(net::Connection& conn, protocol::ClientMessage first);

  GatewayConfig config_;
  RoutingTable table_;
  RateLimiter limiter_;
  std::atomic<std::uint64_t> redirects_{0}, limited_{0}, full_{0};
  std::unique_ptr<net::ConnectionServer> server_;
};

/// Instance side of the gateway protocol: registers, heartbeats once per
/// `period` with the live count from `live`, and forwards release notices.
/// Reconnects after a lost connection.
class GatewayLink {
 public:
  GatewayLink(net::Endpoint gateway, protocol::Register registration, std::function<std::uint32_t()> live,
              std::chrono::milliseconds period = std::chrono::milliseconds(1000));
  ~GatewayLink();

  GatewayLink(const GatewayLink&) = delete;
  GatewayLink& operator=(const GatewayLink&) = delete;

  /// Returns one gateway reservation; also pushes a fresh heartbeat.
  void release();
  /// Sends a heartbeat now.
  void poke();
  void stop();

  [[nodiscard]] bool connected() const { return connected_.load(); }

 private:
  void run();
  void send(const protocol::ClientMessage& m);

  net::Endpoint gateway_;
  protocol::Register registration_;
  std::function<std::uint32_t()> live_;
  std::chrono::milliseconds period_;

  std::mutex mu_;
  std::condition_variable cv_;
  std::unique_ptr<net::Connection> conn_;
  std::uint32_t pending_releases_ = 0;
  bool poke_ = false;
  std::atomic<bool> stop_{false};
  std::atomic<bool> connected_{false};
  std::thread thread_;
};

}  // namespace teleop::gateway

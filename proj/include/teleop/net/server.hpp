#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

#include "teleop/net/connection.hpp"
#include "teleop/net/socket.hpp"

namespace teleop::net {

/// Accept loop with one handler thread per connection. Framing detection runs
/// on the handler thread, so a silent peer never stalls accepts.
class ConnectionServer {
 public:
  using Handler = std::function<void(const std::shared_ptr<Connection>&)>;

  ConnectionServer(const Endpoint& at, Handler handler,
                   std::chrono::milliseconds detect_timeout = std::chrono::milliseconds(3000));
  ~ConnectionServer();

  ConnectionServer(const ConnectionServer&) = delete;
  ConnectionServer& operator=(const ConnectionServer&) = delete;

  /// Closes the listener and every open connection, then joins all threads.
  /// Handlers must return once their connection is closed.
  void stop();

  [[nodiscard]] Endpoint endpoint() const { return {listener_.host(), listener_.port()}; }
  [[nodiscard]] std::size_t active() const;

 private:
  void accept_loop();
  void reap();

  Handler handler_;
  std::chrono::milliseconds detect_timeout_;
  Listener listener_;
  std::atomic<bool> stopping_{false};

  mutable std::mutex mu_;
  std::uint64_t next_id_ = 0;
  std::map<std::uint64_t, std::thread> threads_;
  std::map<std::uint64_t, std::shared_ptr<Connection>> connections_;
  std::vector<std::uint64_t> finished_;
  std::thread acceptor_;
};

}  // namespace teleop::net

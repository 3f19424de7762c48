#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "teleop/core/bytes.hpp"

namespace teleop::net {

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;

  [[nodiscard]] std::string str() const { return host + ":" + std::to_string(port); }
  friend bool operator==(const Endpoint&, const Endpoint&) = default;
};

/// Parses "host:port". Throws std::invalid_argument.
Endpoint parse_endpoint(std::string_view text);

/// Owning TCP socket. Reads and writes may run on different threads;
/// shutdown() may be called from any thread to unblock both.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd);
  Socket(Socket&& other) noexcept;
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket();

  /// Connects with TCP_NODELAY. A non-empty bind_ip fixes the source
  /// address. Throws Error(ConnectionClosed) on failure.
  static Socket connect(const Endpoint& to, std::string_view bind_ip = {},
                        std::chrono::milliseconds timeout = std::chrono::milliseconds(3000));

  /// Returns 0 on orderly EOF. Throws Error(ConnectionClosed) on error.
  std::size_t read_some(std::span<std::uint8_t> out);
  /// Throws Error(ConnectionClosed) on error or send timeout.
  void write_all(ByteView data);
  /// True when data (or EOF) is ready within the timeout.
  bool wait_readable(std::chrono::milliseconds timeout);

  void shutdown();
  [[nodiscard]] bool valid() const { return fd_ >= 0; }
  [[nodiscard]] int fd() const { return fd_; }
  [[nodiscard]] std::string peer_ip() const;

 private:
  int fd_ = -1;
};

class Listener {
 public:
  /// Binds and listens; port 0 picks an ephemeral port.
  explicit Listener(const Endpoint& at, int backlog = 256);
  Listener(const Listener&) = delete;
  Listener& operator=(const Listener&) = delete;
  ~Listener();

  /// Waits up to `timeout` for a connection.
  std::optional<Socket> accept(std::chrono::milliseconds timeout);

  [[nodiscard]] std::uint16_t port() const { return port_; }
  [[nodiscard]] const std::string& host() const { return host_; }
  void close();

 private:
  std::atomic<int> fd_{-1};
  std::string host_;
  std::uint16_t port_ = 0;
};

}  // namespace teleop::net

#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "teleop/core/bytes.hpp"
#include "teleop/net/socket.hpp"

namespace teleop::net {

inline constexpr std::size_t kMaxMessageBytes = 2u << 20;

enum class MessageKind { text, binary };

struct Incoming {
  MessageKind kind = MessageKind::text;
  Bytes data;

  [[nodiscard]] std::string text() const { return to_string(data); }
};

/// A message-framed, bidirectional connection. Two framings share one
/// interface:
///   raw:       text messages are '\n'-terminated lines; binary messages are
///              0xFF, u32 little-endian length, then the payload
///   websocket: RFC 6455 text and binary messages
/// receive() must be called from one thread at a time. send_*() may be called
/// from any thread. close() may be called from any thread and unblocks a
/// pending receive().
class Connection {
 public:
  virtual ~Connection() = default;

  /// Throws Error(ConnectionClosed) once the peer is gone or close() ran.
  virtual void send_text(std::string_view text) = 0;
  virtual void send_binary(ByteView data) = 0;

  /// Next message, or nullopt on timeout. Throws Error(ConnectionClosed) on
  /// EOF and Error(MalformedMessage) on a framing violation.
  virtual std::optional<Incoming> receive(std::chrono::milliseconds timeout) = 0;

  virtual void close() = 0;
  [[nodiscard]] virtual bool closed() const = 0;
  [[nodiscard]] virtual const std::string& peer_ip() const = 0;
  [[nodiscard]] virtual bool is_websocket() const = 0;
};

/// Server side: inspects the first bytes and selects websocket (an HTTP
/// "GET " upgrade) or raw framing. Throws Error(ConnectionClosed) if the peer
/// sends nothing within `timeout` or the upgrade is invalid.
std::unique_ptr<Connection> accept_connection(Socket socket, std::chrono::milliseconds timeout);

struct DialOptions {
  bool websocket = false;
  std::string bind_ip;  // optional source address
  std::string path = "/";
  std::chrono::milliseconds timeout{3000};
};

/// Client side. Throws Error(ConnectionClosed) on failure.
std::unique_ptr<Connection> dial(const Endpoint& to, const DialOptions& options = {});

}  // namespace teleop::net

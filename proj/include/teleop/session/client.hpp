#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>

#include "teleop/net/connection.hpp"
#include "teleop/protocol/messages.hpp"

namespace teleop::session {

struct ClientOptions {
  bool websocket = false;
  std::string bind_ip;
  std::string token{protocol::kDefaultToken};
  std::string device = "sim";
  std::optional<std::string> task;  // routing hint for the gateway
  int protocol = protocol::kProtocolVersion;
  bool report_t1 = true;        // send t1_prev with pings
  double clock_skew_ms = 0.0;   // client clock = server clock + skew (same host)
  bool follow_redirects = true;
  std::chrono::milliseconds timeout{5000};
  /// Optional decorator around every dialled connection (link emulation).
  std::function<std::unique_ptr<net::Connection>(std::unique_ptr<net::Connection>)> wrap;
};

struct FrameMessage {
  Bytes data;
  double t_receive = 0.0;  // client clock, ms
};

using ClientEvent = std::variant<protocol::ServerMessage, FrameMessage>;

/// Client half of the session protocol.
class SessionClient {
 public:
  /// Dials, follows a gateway redirect, and completes hello + clock sync.
  /// A server `err` is rethrown as Error with the server's code.
  static std::unique_ptr<SessionClient> connect(const net::Endpoint& to, const ClientOptions& options = {});

  [[nodiscard]] const protocol::Welcome& welcome() const { return welcome_; }
  [[nodiscard]] const std::string& redirected_to() const { return redirected_to_; }
  [[nodiscard]] const net::Endpoint& endpoint() const { return endpoint_; }
  [[nodiscard]] double now_ms() const;

  /// Stamps seq (when zero) and t_client; returns the sequence number sent.
  std::uint64_t send_pose(protocol::Pose pose);
  void send_ping();
  void send_reset();
  void send_bye();
  void send_raw(std::string_view text);

  /// Next server message or frame; nullopt on timeout. Pongs feed t1_prev.
  std::optional<ClientEvent> receive(std::chrono::milliseconds timeout);

  void close();
  net::Connection& connection() { return *conn_; }

 private:
  SessionClient(std::unique_ptr<net::Connection> conn, ClientOptions options, net::Endpoint at);
  void handshake();

  std::unique_ptr<net::Connection> conn_;
  ClientOptions options_;
  net::Endpoint endpoint_;
  protocol::Welcome welcome_;
  std::string redirected_to_;
  std::uint64_t next_seq_ = 1;
  std::uint64_t ping_seq_ = 0;
  std::optional<double> last_t1_;
};

/// Sends one stats query and returns the reply.
protocol::StatsReply query_stats(const net::Endpoint& to, const std::string& token, bool reset = false);

/// Throws Error with the code named by an `err` message.
[[noreturn]] void raise(const protocol::Err& err);

}  // namespace teleop::session

#include "teleop/session/client.hpp"

#include "teleop/core/clock.hpp"

namespace teleop::session {

void raise(const protocol::Err& err) {
  throw Error(error_code_from_string(err.code).value_or(ErrorCode::MalformedMessage), err.code + ": " + err.detail);
}

namespace {

std::unique_ptr<net::Connection> open(const net::Endpoint& to, const ClientOptions& o) {
  net::DialOptions d;
  d.websocket = o.websocket;
  d.bind_ip = o.bind_ip;
  d.timeout = o.timeout;
  auto conn = net::dial(to, d);
  return o.wrap ? o.wrap(std::move(conn)) : std::move(conn);
}

protocol::ServerMessage expect_text(net::Connection& conn, std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (true) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) throw Error(ErrorCode::ConnectionClosed, "handshake timed out");
    auto in = conn.receive(left);
    if (!in) continue;
    if (in->kind == net::MessageKind::binary) continue;
    return protocol::parse_server(in->text());
  }
}

}  // namespace

SessionClient::SessionClient(std::unique_ptr<net::Connection> conn, ClientOptions options, net::Endpoint at)
    : conn_(std::move(conn)), options_(std::move(options)), endpoint_(std::move(at)) {}

double SessionClient::now_ms() const { return seconds_to_ms(now_seconds()) + options_.clock_skew_ms; }

std::unique_ptr<SessionClient> SessionClient::connect(const net::Endpoint& to, const ClientOptions& options) {
  net::Endpoint at = to;
  std::string redirected;
  for (int hop = 0; hop < 3; ++hop) {
    std::unique_ptr<SessionClient> c(new SessionClient(open(at, options), options, at));
    c->redirected_to_ = redirected;
    try {
      c->handshake();
      return c;
    } catch (const protocol::Redirect& r) {
      if (!options.follow_redirects) throw Error(ErrorCode::NoInstance, "redirected to " + r.address);
      c->close();
      at = net::parse_endpoint(r.address);
      redirected = r.address;
    }
  }
  throw Error(ErrorCode::NoInstance, "too many redirects");
}

void SessionClient::handshake() {
  protocol::Hello hello;
  hello.protocol = options_.protocol;
  hello.device = options_.device;
  hello.token = options_.token;
  hello.task = options_.task;
  conn_->send_text(protocol::encode(hello));
  send_ping();
  while (true) {
    const protocol::ServerMessage m = expect_text(*conn_, options_.timeout);
    if (const auto* pong = std::get_if<protocol::Pong>(&m)) {
      (void)pong;
      last_t1_ = now_ms();
      send_ping();
    } else if (const auto* w = std::get_if<protocol::Welcome>(&m)) {
      welcome_ = *w;
      return;
    } else if (const auto* r = std::get_if<protocol::Redirect>(&m)) {
      throw *r;
    } else if (const auto* e = std::get_if<protocol::Err>(&m)) {
      raise(*e);
    }
  }
}

std::uint64_t SessionClient::send_pose(protocol::Pose pose) {
  if (pose.seq == 0) pose.seq = next_seq_;
  next_seq_ = std::max(next_seq_, pose.seq + 1);
  pose.t_client = now_ms();
  conn_->send_text(protocol::encode(pose));
  return pose.seq;
}

void SessionClient::send_ping() {
  protocol::Ping p;
  p.seq = ++ping_seq_;
  p.t0 = now_ms();
  if (options_.report_t1) p.t1_prev = last_t1_;
  conn_->send_text(protocol::encode(p));
}

void SessionClient::send_reset() { conn_->send_text(protocol::encode(protocol::Reset{})); }
void SessionClient::send_bye() { conn_->send_text(protocol::encode(protocol::Bye{})); }
void SessionClient::send_raw(std::string_view text) { conn_->send_text(text); }

std::optional<ClientEvent> SessionClient::receive(std::chrono::milliseconds timeout) {
  auto in = conn_->receive(timeout);
  if (!in) return std::nullopt;
  if (in->kind == net::MessageKind::binary) return FrameMessage{std::move(in->data), now_ms()};
  protocol::ServerMessage m = protocol::parse_server(in->text());
  if (std::holds_alternative<protocol::Pong>(m)) last_t1_ = now_ms();
  return m;
}

void SessionClient::close() {
  if (conn_) conn_->close();
}

protocol::StatsReply query_stats(const net::Endpoint& to, const std::string& token, bool reset) {
  auto conn = net::dial(to);
  conn->send_text(protocol::encode(protocol::StatsRequest{token, reset}));
  const protocol::ServerMessage m = expect_text(*conn, std::chrono::milliseconds(5000));
  conn->close();
  if (const auto* e = std::get_if<protocol::Err>(&m)) raise(*e);
  if (const auto* s = std::get_if<protocol::StatsReply>(&m)) return *s;
  throw Error(ErrorCode::MalformedMessage, "expected a stats reply");
}

}  // namespace teleop::session

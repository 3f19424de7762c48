#include "teleop/gateway/server.hpp"

#include "teleop/core/clock.hpp"

namespace teleop::gateway {

using namespace std::chrono_literals;

GatewayServer::GatewayServer(GatewayConfig config)
    : config_(std::move(config)), table_(config_.stale_after), limiter_(config_.bucket) {
  server_ = std::make_unique<net::ConnectionServer>(config_.listen, [this](const auto& conn) { handle(conn); });
}

GatewayServer::~GatewayServer() { stop(); }

void GatewayServer::stop() { server_->stop(); }

GatewayCounters GatewayServer::counters() const { return {redirects_.load(), limited_.load(), full_.load()}; }

void GatewayServer::handle(const std::shared_ptr<net::Connection>& conn) {
  auto reply = [&](const protocol::ServerMessage& m) { conn->send_text(protocol::encode(m)); };
  std::optional<net::Incoming> in = conn->receive(5000ms);
  if (!in) return;
  protocol::ClientMessage first;
  try {
    first = protocol::parse_client(in->text());
  } catch (const Error& e) {
    reply(protocol::make_err(e.code(), e.what()));
    return;
  }
  if (std::holds_alternative<protocol::Register>(first)) {
    serve_instance(*conn, first);
    return;
  }
  const auto* hello = std::get_if<protocol::Hello>(&first);
  if (!hello) {
    reply(protocol::make_err(ErrorCode::MalformedMessage, "expected hello or register"));
    return;
  }
  if (hello->protocol != protocol::kProtocolVersion) {
    reply(protocol::make_err(ErrorCode::VersionMismatch, "gateway speaks protocol 1"));
    return;
  }
  const double now = now_seconds();
  if (!limiter_.allow(conn->peer_ip(), now)) {
    ++limited_;
    reply(protocol::make_err(ErrorCode::RateLimited, "too many handshakes from " + conn->peer_ip()));
    return;
  }
  const std::string task = hello->task.value_or("");
  try {
    const InstanceRecord r = table_.route(task, now);
    ++redirects_;
    reply(protocol::Redirect{r.address, r.id});
  } catch (const Error& e) {
    // A full fleet is a retryable condition for clients; no fleet is not.
    if (table_.serves(task, now)) {
      ++full_;
      reply(protocol::make_err(ErrorCode::NoCapacity, e.what()));
    } else {
      reply(protocol::make_err(ErrorCode::NoInstance, e.what()));
    }
  }
}

void GatewayServer::serve_instance(net::Connection& conn, protocol::ClientMessage first) {
  auto apply = [&](const protocol::ClientMessage& m) {
    const double now = now_seconds();
    try {
      if (const auto* r = std::get_if<protocol::Register>(&m)) {
        table_.register_instance({r->instance, r->address, r->task, r->capacity, r->live, 0, now}, now);
      } else if (const auto* h = std::get_if<protocol::Heartbeat>(&m)) {
        table_.heartbeat(h->instance, h->live, now);
      } else if (const auto* rel = std::get_if<protocol::Release>(&m)) {
        table_.release(rel->instance);
      } else {
        throw Error(ErrorCode::MalformedMessage, "only register, heartbeat and release on an instance channel");
      }
    } catch (const Error& e) {
      conn.send_text(protocol::encode(protocol::make_err(e.code(), e.what())));
    }
  };
  apply(first);
  while (true) {
    const std::optional<net::Incoming> in = conn.receive(1000ms);
    if (!in) continue;
    try {
      apply(protocol::parse_client(in->text()));
    } catch (const Error& e) {
      conn.send_text(protocol::encode(protocol::make_err(e.code(), e.what())));
      if (e.code() == ErrorCode::UnknownMessageType) return;
    }
  }
}

// --- GatewayLink -------------------------------------------------------------

GatewayLink::GatewayLink(net::Endpoint gateway, protocol::Register registration, std::function<std::uint32_t()> live,
                         std::chrono::milliseconds period)
    : gateway_(std::move(gateway)), registration_(std::move(registration)), live_(std::move(live)), period_(period) {
  thread_ = std::thread([this] { run(); });
}

GatewayLink::~GatewayLink() { stop(); }

void GatewayLink::stop() {
  if (stop_.exchange(true)) {
    if (thread_.joinable()) thread_.join();
    return;
  }
  cv_.notify_all();
  if (thread_.joinable()) thread_.join();
}

void GatewayLink::release() {
  std::lock_guard lock(mu_);
  ++pending_releases_;
  cv_.notify_all();
}

void GatewayLink::poke() {
  std::lock_guard lock(mu_);
  poke_ = true;
  cv_.notify_all();
}

void GatewayLink::send(const protocol::ClientMessage& m) { conn_->send_text(protocol::encode(m)); }

void GatewayLink::run() {
  while (!stop_.load()) {
    try {
      conn_ = net::dial(gateway_);
      protocol::Register reg = registration_;
      reg.live = live_();
      send(reg);
      connected_ = true;
      auto next = std::chrono::steady_clock::now() + period_;
      while (!stop_.load()) {
        std::uint32_t releases = 0;
        bool poke = false;
        {
          std::unique_lock lock(mu_);
          cv_.wait_until(lock, next, [&] { return stop_.load() || pending_releases_ > 0 || poke_; });
          releases = pending_releases_;
          pending_releases_ = 0;
          poke = poke_;
          poke_ = false;
        }
        if (stop_.load()) break;
        for (std::uint32_t i = 0; i < releases; ++i) send(protocol::Release{registration_.instance});
        if (releases > 0 || poke || std::chrono::steady_clock::now() >= next) {
          send(protocol::Heartbeat{registration_.instance, live_()});
          next = std::chrono::steady_clock::now() + period_;
        }
        // Drain any error replies so the socket buffer never fills.
        while (conn_->receive(0ms)) {
        }
      }
    } catch (const Error&) {
      connected_ = false;
      std::unique_lock lock(mu_);
      cv_.wait_for(lock, 200ms, [&] { return stop_.load(); });
    }
    if (conn_) conn_->close();
    connected_ = false;
  }
}

}  // namespace teleop::gateway

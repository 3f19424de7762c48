#include "teleop/session/server.hpp"

#include <condition_variable>
#include <deque>
#include <iomanip>
#include <sstream>

#include "teleop/core/clock.hpp"
#include "teleop/media/pipeline.hpp"
#include "teleop/session/clock_sync.hpp"

namespace teleop::session {

namespace {

using namespace std::chrono_literals;
using protocol::ClientMessage;

constexpr int kMaxSyncPings = 16;

class ConnectionSink : public media::FrameSink {
 public:
  explicit ConnectionSink(net::Connection& conn) : conn_(conn) {}
  void send(const Bytes& frame) override { conn_.send_binary(frame); }

 private:
  net::Connection& conn_;
};

double now_ms() { return seconds_to_ms(now_seconds()); }

}  // namespace

struct SessionServer::Live {
  std::shared_ptr<net::Connection> conn;
  std::atomic<bool> stop{false};
  std::atomic<bool> expired{false};
};

SessionServer::SessionServer(SessionServerConfig config, SessionBackend& backend, statestore::StateStore& store)
    : config_(std::move(config)), backend_(backend), store_(store), id_rng_(std::random_device{}()) {
  sweeper_ = std::thread([this] { sweep_loop(); });
  server_ = std::make_unique<net::ConnectionServer>(config_.listen,
                                                     [this](const auto& conn) { handle(conn); });
}

SessionServer::~SessionServer() { stop(); }

void SessionServer::stop() {
  if (stopping_.exchange(true)) return;
  sweep_cv_.notify_all();
  if (sweeper_.joinable()) sweeper_.join();
  server_->stop();
}

SessionCounters SessionServer::counters() const {
  return {started_.load(), dropped_.load(), expired_.load(), rejected_.load(), stale_.load(), malformed_.load()};
}

void SessionServer::send(net::Connection& conn, const protocol::ServerMessage& m) {
  conn.send_text(protocol::encode(m));
}

std::string SessionServer::new_session_id() {
  std::lock_guard lock(mu_);
  std::ostringstream os;
  os << config_.instance << '-' << ++id_counter_ << '-' << std::hex << std::setw(16) << std::setfill('0')
     << id_rng_();
  return os.str();
}

protocol::StatsReply SessionServer::stats(bool reset) {
  protocol::StatsReply r = backend_.stats(reset);
  r.instance = config_.instance;
  r.task = backend_.task_name();
  r.live_sessions = static_cast<std::uint32_t>(registry_.size());
  r.capacity = static_cast<std::uint32_t>(backend_.capacity());
  r.sessions_started = started_.load();
  r.dropped_sessions = dropped_.load();
  return r;
}

void SessionServer::sweep_loop() {
  std::unique_lock lock(sweep_mu_);
  while (!stopping_.load()) {
    sweep_cv_.wait_for(lock, config_.sweep_period, [this] { return stopping_.load(); });
    if (stopping_.load()) break;
    lock.unlock();
    sweep(now_seconds());
    lock.lock();
  }
}

std::vector<std::string> SessionServer::sweep(double now) {
  std::vector<std::string> ids = registry_.expire(now, config_.idle_timeout);
  for (const auto& id : ids) {
    std::shared_ptr<Live> live;
    {
      std::lock_guard lock(mu_);
      if (auto it = live_.find(id); it != live_.end()) live = it->second;
    }
    if (!live) continue;
    live->expired = true;
    ++expired_;
    try {
      send(*live->conn, protocol::EventNotice{"expired"});
    } catch (const Error&) {
    }
    live->conn->close();
  }
  return ids;
}

void SessionServer::handle(const std::shared_ptr<net::Connection>& conn) {
  std::optional<net::Incoming> in;
  try {
    in = conn->receive(config_.handshake_timeout);
  } catch (const Error&) {
    return;
  }
  if (!in) return;
  ClientMessage first;
  try {
    if (in->kind != net::MessageKind::text) throw Error(ErrorCode::MalformedMessage, "expected a text message");
    first = protocol::parse_client(in->text());
  } catch (const Error& e) {
    ++malformed_;
    try {
      send(*conn, protocol::make_err(e.code(), e.what()));
    } catch (const Error&) {
    }
    return;
  }
  try {
    if (const auto* s = std::get_if<protocol::StatsRequest>(&first)) {
      serve_stats(*conn, *s);
    } else if (const auto* h = std::get_if<protocol::Hello>(&first)) {
      run_session(conn, *h);
    } else {
      send(*conn, protocol::make_err(ErrorCode::MalformedMessage, "expected hello"));
    }
  } catch (const Error&) {
    // Peer went away mid-reply.
  }
}

void SessionServer::serve_stats(net::Connection& conn, const protocol::StatsRequest& first) {
  protocol::StatsRequest req = first;
  while (true) {
    if (req.token != config_.token) {
      send(conn, protocol::make_err(ErrorCode::Unauthorized, "bad token"));
      return;
    }
    send(conn, stats(req.reset));
    std::optional<net::Incoming> in = conn.receive(30s);
    if (!in) return;
    const auto next = protocol::parse_client(in->text());
    const auto* s = std::get_if<protocol::StatsRequest>(&next);
    if (!s) return;
    req = *s;
  }
}

std::optional<double> SessionServer::clock_sync(net::Connection& conn) {
  std::vector<PingExchange> exchanges;
  std::vector<double> one_way;
  std::optional<protocol::Pong> prev;
  bool legacy = false;
  for (int n = 1; n <= kMaxSyncPings; ++n) {
    std::optional<net::Incoming> in = conn.receive(config_.handshake_timeout);
    if (!in) return std::nullopt;
    const double t_server = now_ms();
    const ClientMessage m = protocol::parse_client(in->text());
    const auto* p = std::get_if<protocol::Ping>(&m);
    if (!p) {
      send(conn, protocol::make_err(ErrorCode::MalformedMessage, "clock sync expects ping"));
      return std::nullopt;
    }
    if (p->t1_prev && prev) exchanges.push_back({prev->t0, prev->t_server, *p->t1_prev});
    one_way.push_back(t_server - p->t0);
    if (n == 2 && !p->t1_prev) legacy = true;
    if (!legacy && exchanges.size() >= kMinPings) return estimate_clock_offset(exchanges);
    if (legacy && one_way.size() >= kMinPings) return estimate_clock_offset_one_way(one_way);
    prev = protocol::Pong{p->seq, p->t0, now_ms()};
    send(conn, *prev);
  }
  send(conn, protocol::make_err(ErrorCode::TooFewPings, "clock sync did not converge"));
  return std::nullopt;
}

void SessionServer::run_session(const std::shared_ptr<net::Connection>& conn, const protocol::Hello& hello) {
  if (hello.protocol != protocol::kProtocolVersion) {
    ++rejected_;
    send(*conn, protocol::make_err(ErrorCode::VersionMismatch,
                                   "server speaks protocol " + std::to_string(protocol::kProtocolVersion)));
    return;
  }
  if (hello.token != config_.token) {
    ++rejected_;
    send(*conn, protocol::make_err(ErrorCode::Unauthorized, "bad token"));
    return;
  }
  std::optional<double> offset_ms;
  try {
    offset_ms = clock_sync(*conn);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConnectionClosed) throw;
    send(*conn, protocol::make_err(e.code(), e.what()));
    return;
  }
  if (!offset_ms) return;

  const std::string id = new_session_id();
  const double offset = ms_to_seconds(*offset_ms);
  const std::optional<std::uint32_t> env = backend_.open_session({id, hello.device, offset});
  if (!env) {
    ++rejected_;
    send(*conn, protocol::make_err(ErrorCode::NoCapacity, "every environment is taken"));
    return;
  }

  Session s;
  s.id = id;
  s.device = hello.device;
  s.instance = config_.instance;
  s.env = *env;
  s.clock_offset = offset;
  s.last_seen = now_seconds();
  registry_.add(s);
  auto live = std::make_shared<Live>();
  live->conn = conn;
  {
    std::lock_guard lock(mu_);
    live_[id] = live;
  }
  statestore::Subscription events = store_.subscribe(statestore::event_channel(id));
  ++started_;
  if (config_.on_session_start) config_.on_session_start(id);

  Outcome outcome = Outcome::abandoned;
  std::thread media;
  try {
    send(*conn, protocol::Welcome{id, *env, backend_.task_name(), 20, protocol::kFrameSchema, *offset_ms,
                                  config_.instance});
    media = std::thread([this, conn, live, env, &events] {
      ConnectionSink sink(*conn);
      auto ring = store_.ring(statestore::frame_ring_name(*env));
      media::stream(*ring, sink, live->stop, [&] {
        while (auto d = events.poll()) {
          if (const auto* m = std::get_if<statestore::Message>(&*d)) {
            send(*conn, protocol::EventNotice{to_string(*m->payload)});
          }
        }
      });
    });

    ClockSync sync(seconds_to_ms(config_.resync_period));
    sync.seed(*offset_ms, now_ms());
    std::optional<protocol::Pong> last_pong;
    std::deque<double> malformed_at;
    bool done = false;
    while (!done && !live->stop.load()) {
      std::optional<net::Incoming> in = conn->receive(250ms);
      if (!in) continue;
      const double now = now_seconds();
      ClientMessage m;
      try {
        if (in->kind != net::MessageKind::text) throw Error(ErrorCode::MalformedMessage, "binary message from client");
        m = protocol::parse_client(in->text());
        if (std::holds_alternative<protocol::Hello>(m) || std::holds_alternative<protocol::StatsRequest>(m) ||
            std::holds_alternative<protocol::Register>(m) || std::holds_alternative<protocol::Heartbeat>(m) ||
            std::holds_alternative<protocol::Release>(m)) {
          throw Error(ErrorCode::MalformedMessage, "message not valid inside a session");
        }
      } catch (const Error& e) {
        ++malformed_;
        send(*conn, protocol::make_err(e.code(), e.what()));
        if (e.code() == ErrorCode::UnknownMessageType) break;
        malformed_at.push_back(now);
        while (!malformed_at.empty() && now - malformed_at.front() > config_.malformed_window) malformed_at.pop_front();
        if (malformed_at.size() >= config_.malformed_limit) break;
        continue;
      }
      std::visit(
          [&](const auto& msg) {
            using T = std::decay_t<decltype(msg)>;
            if constexpr (std::is_same_v<T, protocol::Pose>) {
              if (registry_.accept(id, msg.seq, now)) {
                const PoseCommand cmd = to_command(msg, now, ms_to_seconds(sync.offset()));
                store_.publish(statestore::command_channel(id), encode_pose_command(cmd));
                send(*conn, protocol::Ack{msg.seq, now_ms()});
              } else {
                ++stale_;
                backend_.command_dropped(id);
              }
            } else if constexpr (std::is_same_v<T, protocol::Ping>) {
              registry_.touch(id, now);
              if (msg.t1_prev && last_pong) {
                if (auto updated = sync.add({last_pong->t0, last_pong->t_server, *msg.t1_prev}, seconds_to_ms(now))) {
                  registry_.set_clock_offset(id, ms_to_seconds(*updated));
                }
              }
              last_pong = protocol::Pong{msg.seq, msg.t0, seconds_to_ms(now)};
              send(*conn, *last_pong);
            } else if constexpr (std::is_same_v<T, protocol::Reset>) {
              registry_.touch(id, now);
              store_.publish(statestore::control_channel(id), to_bytes("reset"));
            } else if constexpr (std::is_same_v<T, protocol::Bye>) {
              outcome = Outcome::failure;
              done = true;
            }
          },
          m);
    }
  } catch (const Error&) {
    // Disconnect or expiry: the session is abandoned.
  }

  live->stop = true;
  if (media.joinable()) media.join();
  events.cancel();
  if (live->expired.load()) outcome = Outcome::abandoned;
  registry_.remove(id);
  {
    std::lock_guard lock(mu_);
    live_.erase(id);
  }
  backend_.close_session(id, outcome);
  if (outcome == Outcome::abandoned) ++dropped_;
  if (config_.on_session_end) config_.on_session_end(id, outcome);
  conn->close();
}

}  // namespace teleop::session

#include <gtest/gtest.h>

#include <random>
#include <thread>

#include "support/fake_backend.hpp"
#include "teleop/core/clock.hpp"
#include "teleop/core/stats.hpp"
#include "teleop/media/codec.hpp"
#include "teleop/session/client.hpp"
#include "teleop/session/server.hpp"

namespace teleop::session {
namespace {

using namespace std::chrono_literals;
using testing::eventually;
using testing::FakeBackend;

struct Fixture {
  explicit Fixture(std::size_t capacity, SessionServerConfig cfg = {}) : backend(capacity) {
    server = std::make_unique<SessionServer>(std::move(cfg), backend, store);
  }
  ~Fixture() { server->stop(); }

  std::unique_ptr<SessionClient> connect(ClientOptions o = {}) { return SessionClient::connect(server->endpoint(), o); }

  FakeBackend backend;
  statestore::StateStore store;
  std::unique_ptr<SessionServer> server;
};

ErrorCode connect_error(Fixture& f, const ClientOptions& o) {
  try {
    f.connect(o);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "connect succeeded";
  return ErrorCode::ZeroNorm;
}

template <typename T>
std::optional<T> wait_for(SessionClient& c, std::chrono::milliseconds timeout = 2000ms) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (std::chrono::steady_clock::now() < deadline) {
    auto ev = c.receive(50ms);
    if (!ev) continue;
    if (auto* m = std::get_if<protocol::ServerMessage>(&*ev)) {
      if (auto* t = std::get_if<T>(m)) return *t;
    }
  }
  return std::nullopt;
}

bool closed_by_server(SessionClient& c, std::chrono::milliseconds timeout = 3000ms) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  try {
    while (std::chrono::steady_clock::now() < deadline) c.receive(50ms);
  } catch (const Error& e) {
    return e.code() == ErrorCode::ConnectionClosed;
  }
  return false;
}

protocol::Pose pose(std::uint64_t seq) {
  protocol::Pose p;
  p.seq = seq;
  p.dpos = {0.01, 0, 0};
  return p;
}

TEST(Handshake, WelcomeCarriesEnvAndTask) {
  Fixture f(4);
  auto c = f.connect();
  EXPECT_LT(c->welcome().env, 4u);
  EXPECT_EQ(c->welcome().task, "lift");
  EXPECT_EQ(c->welcome().tick_hz, 20);
  EXPECT_EQ(c->welcome().schema, 1);
  EXPECT_FALSE(c->welcome().session.empty());
  EXPECT_NEAR(c->welcome().clock_offset, 0.0, 1.0);
  EXPECT_TRUE(eventually([&] { return f.server->live_sessions() == 1; }));
}

TEST(Handshake, FifthSessionOnFourEnvsGetsNoCapacity) {
  Fixture f(4);
  std::vector<std::unique_ptr<SessionClient>> clients;
  std::set<std::uint32_t> envs;
  for (int i = 0; i < 4; ++i) {
    clients.push_back(f.connect());
    envs.insert(clients.back()->welcome().env);
  }
  EXPECT_EQ(envs.size(), 4u);
  EXPECT_EQ(connect_error(f, {}), ErrorCode::NoCapacity);
}

TEST(Handshake, VersionAndToken) {
  Fixture f(4);
  ClientOptions old;
  old.protocol = 0;
  EXPECT_EQ(connect_error(f, old), ErrorCode::VersionMismatch);
  ClientOptions bad;
  bad.token = "nope";
  EXPECT_EQ(connect_error(f, bad), ErrorCode::Unauthorized);
  EXPECT_EQ(f.backend.assigned(), 0u);
}

TEST(Handshake, ClockOffsetFromSkewedClient) {
  Fixture f(4);
  ClientOptions o;
  o.clock_skew_ms = -120.0;  // client clock behind: server minus client = +120
  auto c = f.connect(o);
  EXPECT_NEAR(c->welcome().clock_offset, 120.0, 2.0);
  const auto info = f.backend.info(c->welcome().session);
  ASSERT_TRUE(info);
  EXPECT_NEAR(info->clock_offset, 0.120, 0.002);
}

TEST(Handshake, ClientWithoutT1StillAdmitted) {
  Fixture f(4);
  ClientOptions o;
  o.report_t1 = false;
  o.clock_skew_ms = 50.0;
  auto c = f.connect(o);
  EXPECT_NEAR(c->welcome().clock_offset, -50.0, 2.0);
}

TEST(Handshake, WebSocketClient) {
  Fixture f(4);
  ClientOptions o;
  o.websocket = true;
  auto c = f.connect(o);
  auto sub = f.store.subscribe(statestore::command_channel(c->welcome().session));
  c->send_pose(pose(1));
  EXPECT_TRUE(wait_for<protocol::Ack>(*c));
  EXPECT_TRUE(sub.next_for(1000ms));
}

TEST(Ingest, InOrderPublishesAndAcks) {
  Fixture f(4);
  auto c = f.connect();
  const std::string id = c->welcome().session;
  auto sub = f.store.subscribe(statestore::command_channel(id));
  for (std::uint64_t s = 1; s <= 3; ++s) c->send_pose(pose(s));
  std::vector<std::uint64_t> acks;
  for (int i = 0; i < 3; ++i) {
    auto a = wait_for<protocol::Ack>(*c);
    ASSERT_TRUE(a);
    acks.push_back(a->seq);
  }
  EXPECT_EQ(acks, (std::vector<std::uint64_t>{1, 2, 3}));
  for (std::uint64_t s = 1; s <= 3; ++s) {
    auto d = sub.next_for(1000ms);
    ASSERT_TRUE(d);
    const auto* m = std::get_if<statestore::Message>(&*d);
    ASSERT_TRUE(m);
    EXPECT_EQ(decode_pose_command(*m->payload).seq, s);
  }
}

TEST(Ingest, StaleSequenceDroppedAndCounted) {
  Fixture f(4);
  auto c = f.connect();
  const std::string id = c->welcome().session;
  auto sub = f.store.subscribe(statestore::command_channel(id));
  c->send_pose(pose(3));
  c->send_pose(pose(2));
  c->send_ping();  // ordering fence
  ASSERT_TRUE(wait_for<protocol::Pong>(*c));
  EXPECT_TRUE(eventually([&] { return f.backend.dropped(id) == 1; }));
  EXPECT_EQ(f.server->counters().stale_commands, 1u);
  auto d = sub.next_for(500ms);
  ASSERT_TRUE(d);
  EXPECT_EQ(decode_pose_command(*std::get<statestore::Message>(*d).payload).seq, 3u);
  EXPECT_FALSE(sub.next_for(200ms));
}

TEST(Ingest, AckNotBeforeReceive) {
  Fixture f(4);
  auto c = f.connect();
  auto sub = f.store.subscribe(statestore::command_channel(c->welcome().session));
  for (std::uint64_t s = 1; s <= 50; ++s) {
    c->send_pose(pose(s));
    const auto a = wait_for<protocol::Ack>(*c);
    ASSERT_TRUE(a);
    const auto d = sub.next_for(1000ms);
    ASSERT_TRUE(d);
    const PoseCommand cmd = decode_pose_command(*std::get<statestore::Message>(*d).payload);
    EXPECT_GE(a->t_server, seconds_to_ms(cmd.t_receive));
  }
}

TEST(Ingest, ZeroDelayCorrectedLatencyP95Under5ms) {
  Fixture f(4);
  auto c = f.connect();
  auto sub = f.store.subscribe(statestore::command_channel(c->welcome().session));
  std::vector<double> lat;
  for (std::uint64_t s = 1; s <= 200; ++s) {
    c->send_pose(pose(s));
    const auto d = sub.next_for(1000ms);
    ASSERT_TRUE(d);
    lat.push_back(decode_pose_command(*std::get<statestore::Message>(*d).payload).corrected_latency());
    std::this_thread::sleep_for(5ms);
  }
  EXPECT_LT(percentile_nearest_rank(lat, 95) * 1e3, 5.0);
  for (double l : lat) EXPECT_GT(l, -0.005);
}

TEST(Ingest, MalformedLimitClosesConnection) {
  Fixture f(4);
  auto c = f.connect();
  for (int i = 0; i < 9; ++i) c->send_raw("{not json");
  c->send_ping();
  ASSERT_TRUE(wait_for<protocol::Pong>(*c));  // still open after 9
  c->send_raw(R"({"type":"pose","seq":"x"})");
  EXPECT_TRUE(closed_by_server(*c));
  EXPECT_TRUE(eventually([&] { return f.backend.assigned() == 0; }));
}

TEST(Ingest, UnknownTypeClosesConnection) {
  Fixture f(4);
  auto c = f.connect();
  c->send_raw(R"({"type":"teleport"})");
  auto e = wait_for<protocol::Err>(*c);
  ASSERT_TRUE(e);
  EXPECT_EQ(e->code, "UnknownMessageType");
  EXPECT_TRUE(closed_by_server(*c));
}

TEST(Lifecycle, ByeIsFailureDisconnectIsAbandoned) {
  Fixture f(4);
  auto a = f.connect();
  auto b = f.connect();
  const std::string ida = a->welcome().session, idb = b->welcome().session;
  a->send_bye();
  b->close();
  EXPECT_TRUE(eventually([&] { return f.backend.outcome(ida) && f.backend.outcome(idb); }));
  EXPECT_EQ(*f.backend.outcome(ida), Outcome::failure);
  EXPECT_EQ(*f.backend.outcome(idb), Outcome::abandoned);
  EXPECT_EQ(f.server->counters().dropped, 1u);
  EXPECT_EQ(f.backend.assigned(), 0u);
}

TEST(Lifecycle, ResetPublishedOnControlChannel) {
  Fixture f(4);
  auto c = f.connect();
  auto sub = f.store.subscribe(statestore::control_channel(c->welcome().session));
  c->send_reset();
  auto d = sub.next_for(1000ms);
  ASSERT_TRUE(d);
  EXPECT_EQ(to_string(*std::get<statestore::Message>(*d).payload), "reset");
}

TEST(Lifecycle, EventsForwarded) {
  Fixture f(4);
  auto c = f.connect();
  std::this_thread::sleep_for(50ms);
  f.store.publish(statestore::event_channel(c->welcome().session), to_bytes("success"));
  auto e = wait_for<protocol::EventNotice>(*c);
  ASSERT_TRUE(e);
  EXPECT_EQ(e->kind, "success");
}

TEST(Lifecycle, FramesStreamedFromEnvRing) {
  Fixture f(4);
  auto c = f.connect();
  const auto ring = statestore::frame_ring_name(c->welcome().env);
  std::vector<std::uint32_t> seqs;
  for (std::uint64_t t = 1; t <= 20; ++t) {
    simcore::FrameSnapshot s;
    s.tick = t;
    f.store.ring_put(ring, media::to_wire(media::encode(s, media::Encoding::state_v1)));
    std::this_thread::sleep_for(20ms);
  }
  const auto deadline = std::chrono::steady_clock::now() + 1000ms;
  while (std::chrono::steady_clock::now() < deadline && (seqs.empty() || seqs.back() != 20)) {
    auto ev = c->receive(50ms);
    if (ev && std::holds_alternative<FrameMessage>(*ev)) {
      seqs.push_back(media::inspect(std::get<FrameMessage>(*ev).data).env_seq);
    }
  }
  ASSERT_FALSE(seqs.empty());
  EXPECT_EQ(seqs.back(), 20u);
  for (std::size_t i = 1; i < seqs.size(); ++i) EXPECT_GT(seqs[i], seqs[i - 1]);
  EXPECT_GE(seqs.size(), 15u);
}

TEST(Lifecycle, StatsQuery) {
  Fixture f(4);
  auto c = f.connect();
  EXPECT_TRUE(eventually([&] { return f.server->live_sessions() == 1; }));
  const auto s = query_stats(f.server->endpoint(), std::string(protocol::kDefaultToken));
  EXPECT_EQ(s.live_sessions, 1u);
  EXPECT_EQ(s.capacity, 4u);
  EXPECT_EQ(s.sessions_started, 1u);
  EXPECT_EQ(s.tick_period_median, 50.0);
  EXPECT_THROW(query_stats(f.server->endpoint(), "wrong"), Error);
}

TEST(Expiry, IdleSessionExpiresSteadySenderDoesNot) {
  Fixture f(4);
  auto idle = f.connect();
  auto busy = f.connect();
  const std::string idle_id = idle->welcome().session, busy_id = busy->welcome().session;
  std::atomic<bool> stop{false};
  std::thread sender([&] {
    std::uint64_t seq = 0;
    while (!stop) {
      busy->send_pose(pose(++seq));
      while (busy->receive(0ms)) {
      }
      std::this_thread::sleep_for(50ms);
    }
  });
  std::this_thread::sleep_for(6000ms);
  stop = true;
  sender.join();
  EXPECT_TRUE(eventually([&] { return f.backend.outcome(idle_id).has_value(); }));
  EXPECT_EQ(*f.backend.outcome(idle_id), Outcome::abandoned);
  EXPECT_FALSE(f.backend.outcome(busy_id).has_value());
  EXPECT_EQ(f.server->counters().expired, 1u);
  EXPECT_TRUE(f.server->registry().get(busy_id).has_value());
  auto e = wait_for<protocol::EventNotice>(*idle, 500ms);
  ASSERT_TRUE(e);
  EXPECT_EQ(e->kind, "expired");
}

TEST(Expiry, RandomClientsKeepBookkeepingEqual) {
  SessionServerConfig cfg;
  cfg.idle_timeout = 1.0;
  cfg.sweep_period = 100ms;
  Fixture f(64, cfg);
  std::mt19937_64 rng(9);
  std::vector<std::unique_ptr<SessionClient>> active;
  std::vector<std::unique_ptr<SessionClient>> idle;
  for (int i = 0; i < 100; ++i) {
    std::unique_ptr<SessionClient> c;
    try {
      c = f.connect();
    } catch (const Error& e) {
      ASSERT_EQ(e.code(), ErrorCode::NoCapacity);
      continue;
    }
    switch (rng() % 3) {
      case 0: c->close(); break;
      case 1: idle.push_back(std::move(c)); break;
      default: active.push_back(std::move(c)); break;
    }
    if (i % 10 == 0) {
      for (auto& a : active) a->send_ping();
    }
  }
  for (int k = 0; k < 30; ++k) {
    for (auto& a : active) {
      a->send_ping();
      while (a->receive(0ms)) {
      }
    }
    std::this_thread::sleep_for(50ms);
  }
  EXPECT_TRUE(eventually([&] { return f.server->live_sessions() == active.size(); }));
  EXPECT_TRUE(eventually([&] { return f.backend.assigned() == f.server->live_sessions(); }));
}

}  // namespace
}  // namespace teleop::session

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "teleop/core/errors.hpp"
#include "teleop/gateway/routing.hpp"

namespace teleop::gateway {
namespace {

InstanceRecord inst(const std::string& id, std::uint32_t live, std::uint32_t cap = 4, const std::string& task = "lift") {
  InstanceRecord r;
  r.id = id;
  r.address = "127.0.0.1:" + std::to_string(9000 + id.back());
  r.task = task;
  r.capacity = cap;
  r.live = live;
  return r;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return ErrorCode::ZeroNorm;
}

TEST(Route, LeastLoaded) {
  RoutingTable t;
  t.register_instance(inst("a", 3), 0);
  t.register_instance(inst("b", 1), 0);
  t.register_instance(inst("c", 4), 0);
  EXPECT_EQ(t.route("lift", 1).id, "b");
}

TEST(Route, TiesGoToLowestId) {
  RoutingTable t;
  t.register_instance(inst("b", 1), 0);
  t.register_instance(inst("a", 1), 0);
  EXPECT_EQ(t.route("lift", 0).id, "a");
  // a's reservation may be the session its live count already reports, so
  // its load stays max(1, 1) = 1 and the tie repeats.
  EXPECT_EQ(t.route("lift", 0).id, "a");
  EXPECT_EQ(t.route("lift", 0).id, "b");
}

TEST(Route, AllFullIsNoInstance) {
  RoutingTable t;
  t.register_instance(inst("a", 4), 0);
  t.register_instance(inst("b", 4), 0);
  EXPECT_EQ(code_of([&] { t.route("lift", 0); }), ErrorCode::NoInstance);
  EXPECT_TRUE(t.serves("lift", 0));
}

TEST(Route, TaskFilter) {
  RoutingTable t;
  t.register_instance(inst("a", 0, 4, "stack"), 0);
  t.register_instance(inst("b", 2, 4, "lift"), 0);
  EXPECT_EQ(t.route("lift", 0).id, "b");
  EXPECT_EQ(t.route("stack", 0).id, "a");
  EXPECT_EQ(t.route("", 0).id, "a");
  EXPECT_EQ(code_of([&] { t.route("pose-eval", 0); }), ErrorCode::NoInstance);
  EXPECT_FALSE(t.serves("pose-eval", 0));
}

TEST(Heartbeat, UnknownInstance) {
  RoutingTable t;
  EXPECT_EQ(code_of([&] { t.heartbeat("x", 0, 0); }), ErrorCode::UnknownInstance);
  EXPECT_EQ(code_of([&] { t.release("x"); }), ErrorCode::UnknownInstance);
}

TEST(Heartbeat, SilenceExcludesInstance) {
  RoutingTable t;
  t.register_instance(inst("a", 0), 0.0);
  t.register_instance(inst("b", 2), 0.0);
  t.heartbeat("b", 2, 1.0);
  EXPECT_EQ(t.route("lift", 1.0).id, "a");
  EXPECT_EQ(t.route("lift", 4.0).id, "b");  // a silent for 4 s
  t.heartbeat("a", 0, 4.5);
  EXPECT_EQ(t.route("lift", 4.5).id, "a");
}

TEST(Heartbeat, FlappingMatchesLatestStateAtDecision) {
  // Scripted timeline; the oracle recomputes eligibility from the last
  // heartbeat before each decision.
  std::mt19937_64 rng(3);
  RoutingTable t;
  t.register_instance(inst("a", 0, 1000), 0.0);
  t.register_instance(inst("b", 0, 1000), 0.0);
  std::map<std::string, double> last{{"a", 0.0}, {"b", 0.0}};
  std::map<std::string, std::uint32_t> reserved{{"a", 0}, {"b", 0}};
  double now = 0.0;
  for (int step = 0; step < 500; ++step) {
    now += std::uniform_real_distribution<double>(0.1, 2.0)(rng);
    for (const std::string id : {"a", "b"}) {
      if (rng() % 2) {
        t.heartbeat(id, 0, now);
        last[id] = now;
      }
    }
    std::vector<std::string> eligible;
    for (const auto& [id, at] : last) {
      if (now - at <= kHeartbeatStaleAfter) eligible.push_back(id);
    }
    std::sort(eligible.begin(), eligible.end(),
              [&](const auto& x, const auto& y) { return std::tie(reserved[x], x) < std::tie(reserved[y], y); });
    if (eligible.empty()) {
      EXPECT_EQ(code_of([&] { t.route("lift", now); }), ErrorCode::NoInstance);
    } else {
      EXPECT_EQ(t.route("lift", now).id, eligible.front());
      ++reserved[eligible.front()];
    }
  }
}

TEST(Route, BalanceOverIdenticalInstances) {
  for (int k = 1; k <= 5; ++k) {
    RoutingTable t;
    const std::uint32_t cap = 32;
    for (int i = 0; i < k; ++i) t.register_instance(inst(std::string(1, static_cast<char>('a' + i)), 0, cap), 0);
    for (std::uint32_t n = 1; n <= k * cap; ++n) {
      t.route("lift", 0);
      std::uint32_t lo = cap, hi = 0;
      for (const auto& r : t.instances()) {
        lo = std::min(lo, r.load());
        hi = std::max(hi, r.load());
      }
      ASSERT_LE(hi - lo, 1u) << "k=" << k << " n=" << n;
    }
    EXPECT_EQ(code_of([&] { t.route("lift", 0); }), ErrorCode::NoInstance);
  }
}

TEST(Route, SixtyFourOverTwo) {
  RoutingTable t;
  t.register_instance(inst("a", 0, 32), 0);
  t.register_instance(inst("b", 0, 32), 0);
  for (int i = 0; i < 64; ++i) t.route("lift", 0);
  const auto v = t.instances();
  EXPECT_EQ(v[0].reserved, 32u);
  EXPECT_EQ(v[1].reserved, 32u);
}

TEST(Route, NeverExceedsCapacityAndReservationsConserved) {
  std::mt19937_64 rng(12);
  RoutingTable t;
  for (const char* id : {"a", "b", "c"}) t.register_instance(inst(id, 0, 5), 0);
  std::vector<std::string> routed;
  std::uint64_t releases = 0;
  for (int step = 0; step < 5000; ++step) {
    if (routed.empty() || rng() % 3 != 0) {
      try {
        const auto before = t.instances();
        const InstanceRecord r = t.route("lift", 0);
        for (const auto& b : before) {
          if (b.id == r.id) {
            ASSERT_LT(b.load(), b.capacity);
          }
        }
        routed.push_back(r.id);
      } catch (const Error& e) {
        ASSERT_EQ(e.code(), ErrorCode::NoInstance);
      }
    } else {
      const std::size_t i = rng() % routed.size();
      t.release(routed[i]);
      routed.erase(routed.begin() + static_cast<std::ptrdiff_t>(i));
      ++releases;
    }
    std::uint64_t sum = 0;
    for (const auto& r : t.instances()) sum += r.reserved;
    ASSERT_EQ(sum, t.routed() - t.released());
    ASSERT_EQ(sum, routed.size());
  }
  EXPECT_EQ(t.released(), releases);
}

TEST(RateLimit, BurstThenReject) {
  RateLimiter rl;
  for (int i = 0; i < 5; ++i) EXPECT_TRUE(rl.allow("1.2.3.4", 10.0 + i * 0.01));
  EXPECT_FALSE(rl.allow("1.2.3.4", 10.1));
  EXPECT_TRUE(rl.allow("5.6.7.8", 10.1));  // separate bucket per address
}

TEST(RateLimit, SteadyOnePerSecondAlwaysAllowed) {
  RateLimiter rl;
  for (int i = 0; i < 100; ++i) EXPECT_TRUE(rl.allow("a", i * 1.0));
  // After draining the burst, refill admits exactly one per second.
  RateLimiter r2;
  for (int i = 0; i < 5; ++i) r2.allow("a", 0.0);
  for (int i = 1; i <= 20; ++i) {
    EXPECT_TRUE(r2.allow("a", i * 1.0));
    EXPECT_FALSE(r2.allow("a", i * 1.0 + 0.5));
  }
}

}  // namespace
}  // namespace teleop::gateway

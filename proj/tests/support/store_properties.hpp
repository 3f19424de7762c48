#pragma once

// Randomized multi-threaded property checks for the state store. Each check
// returns an empty string on success and a description of the first
// violation otherwise, so both gtest and the acceptance runner can use them.

#include <atomic>
#include <map>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "teleop/core/bytes.hpp"
#include "teleop/core/pose_command.hpp"
#include "teleop/statestore/state_store.hpp"

namespace teleop::testing {

inline Bytes tagged(std::uint32_t producer, std::uint32_t index) {
  Bytes out;
  ByteWriter w(out);
  w.u32(producer);
  w.u32(index);
  return out;
}

/// Producers publish (producer, index) pairs on one channel while several
/// subscribers drain it. Every subscriber must see each producer's messages in
/// order, strictly increasing channel sequence numbers, and account for every
/// message either as delivered or as Lagged.
inline std::string check_total_order(std::uint64_t seed, std::uint32_t producers, std::uint32_t per_producer,
                                     std::uint32_t subscribers) {
  statestore::StateStore store;
  const std::string channel = "order:" + std::to_string(seed);
  std::vector<statestore::Subscription> subs;
  for (std::uint32_t i = 0; i < subscribers; ++i) subs.push_back(store.subscribe(channel));

  std::vector<std::string> errors(subscribers);
  std::vector<std::thread> readers;
  const std::uint64_t total = std::uint64_t{producers} * per_producer;
  for (std::uint32_t i = 0; i < subscribers; ++i) {
    readers.emplace_back([&, i] {
      std::mt19937_64 rng(seed * 31 + i);
      std::vector<std::int64_t> last(producers, -1);
      std::uint64_t last_seq = 0, seen = 0;
      while (seen < total) {
        auto d = subs[i].next_for(std::chrono::milliseconds(2000));
        if (!d) {
          errors[i] = "subscriber " + std::to_string(i) + " stalled at " + std::to_string(seen);
          return;
        }
        if (auto* lag = std::get_if<statestore::Lagged>(&*d)) {
          seen += lag->count;
          continue;
        }
        if (std::holds_alternative<statestore::Closed>(*d)) {
          errors[i] = "unexpected close";
          return;
        }
        const auto& m = std::get<statestore::Message>(*d);
        ++seen;
        if (m.seq <= last_seq) errors[i] = "sequence went backwards";
        last_seq = m.seq;
        ByteReader r(*m.payload);
        const auto p = r.u32();
        const auto idx = static_cast<std::int64_t>(r.u32());
        if (idx <= last[p]) errors[i] = "producer order violated";
        last[p] = idx;
        if (rng() % 64 == 0) std::this_thread::yield();
      }
      if (seen != total) errors[i] = "accounted " + std::to_string(seen) + " of " + std::to_string(total);
    });
  }
  std::vector<std::thread> writers;
  for (std::uint32_t p = 0; p < producers; ++p) {
    writers.emplace_back([&, p] {
      std::mt19937_64 rng(seed + p);
      for (std::uint32_t k = 0; k < per_producer; ++k) {
        store.publish(channel, tagged(p, k));
        if (rng() % 16 == 0) std::this_thread::yield();
      }
    });
  }
  for (auto& t : writers) t.join();
  for (auto& t : readers) t.join();
  for (const auto& e : errors) {
    if (!e.empty()) return e;
  }
  return {};
}

/// A subscriber that never reads while `n` messages are published must get
/// Lagged(n - depth) followed by exactly the last `depth` messages.
inline std::string check_lag_reporting(std::uint32_t n) {
  statestore::StateStore store;
  auto sub = store.subscribe("lag");
  for (std::uint32_t i = 0; i < n; ++i) store.publish("lag", tagged(0, i));
  const std::uint64_t depth = statestore::kSubscriberQueueDepth;
  std::uint64_t expected_lag = n > depth ? n - depth : 0;
  std::uint64_t next_index = expected_lag;
  if (expected_lag > 0) {
    auto d = sub.poll();
    if (!d || !std::holds_alternative<statestore::Lagged>(*d)) return "missing Lagged";
    if (std::get<statestore::Lagged>(*d).count != expected_lag) return "wrong Lagged count";
  }
  while (auto d = sub.poll()) {
    const auto* m = std::get_if<statestore::Message>(&*d);
    if (!m) return "unexpected delivery kind";
    ByteReader r(*m->payload);
    (void)r.u32();
    if (r.u32() != next_index) return "gap without Lagged";
    ++next_index;
  }
  if (next_index != n) return "messages missing at tail";
  return {};
}

/// Capacity-4 ring after 10 puts holds 7..10 with latest 10.
inline std::string check_ring_drop_oldest() {
  statestore::FrameRing ring(4);
  if (ring.latest()) return "empty ring has latest";
  for (std::uint8_t i = 1; i <= 10; ++i) {
    ring.put(Bytes{i});
    if (ring.size() > 4) return "occupancy above capacity";
  }
  const auto latest = ring.latest();
  if (!latest || latest->seq != 10 || (*latest->frame)[0] != 10) return "latest is not frame 10";
  const auto held = ring.contents();
  if (held.size() != 4) return "ring does not hold 4 frames";
  for (std::size_t i = 0; i < 4; ++i) {
    if (held[i].seq != 7 + i || (*held[i].frame)[0] != 7 + i) return "ring does not hold frames 7-10";
  }
  return {};
}

/// One writer and several readers hammer a ring; each reader's latest()
/// sequence must be non-decreasing and occupancy bounded.
inline std::string check_ring_contention(std::uint64_t seed, std::chrono::milliseconds duration) {
  statestore::FrameRing ring(4);
  std::atomic<bool> stop{false};
  std::vector<std::string> errors(4);
  std::vector<std::thread> readers;
  for (int i = 0; i < 4; ++i) {
    readers.emplace_back([&, i] {
      std::uint64_t last = 0;
      while (!stop) {
        if (auto e = ring.latest()) {
          if (e->seq < last) errors[static_cast<std::size_t>(i)] = "ring latest went backwards";
          last = e->seq;
        }
        if (ring.size() > ring.capacity()) errors[static_cast<std::size_t>(i)] = "ring over capacity";
      }
    });
  }
  std::mt19937_64 rng(seed);
  const auto end = std::chrono::steady_clock::now() + duration;
  std::uint32_t k = 0;
  while (std::chrono::steady_clock::now() < end) {
    ring.put(tagged(0, k++));
    if (rng() % 8 == 0) std::this_thread::yield();
  }
  stop = true;
  for (auto& t : readers) t.join();
  for (const auto& e : errors) {
    if (!e.empty()) return e;
  }
  return {};
}

/// A publisher streams commands with increasing seq while readers poll
/// latest_pose; reads must never go backwards.
inline std::string check_latest_pose_monotone(std::uint64_t seed, std::chrono::milliseconds duration) {
  statestore::StateStore store;
  const std::string session = "s" + std::to_string(seed);
  std::atomic<bool> stop{false};
  std::vector<std::string> errors(3);
  std::vector<std::thread> readers;
  for (int i = 0; i < 3; ++i) {
    readers.emplace_back([&, i] {
      std::uint64_t last = 0;
      while (!stop) {
        if (auto c = store.latest_pose(session)) {
          if (c->seq < last) errors[static_cast<std::size_t>(i)] = "latest_pose went backwards";
          last = c->seq;
        }
      }
    });
  }
  std::mt19937_64 rng(seed);
  const auto end = std::chrono::steady_clock::now() + duration;
  PoseCommand cmd;
  while (std::chrono::steady_clock::now() < end) {
    ++cmd.seq;
    store.publish(statestore::command_channel(session), encode_pose_command(cmd));
    if (rng() % 4 == 0) std::this_thread::yield();
  }
  stop = true;
  for (auto& t : readers) t.join();
  for (const auto& e : errors) {
    if (!e.empty()) return e;
  }
  return {};
}

/// Random channel names: nothing published on one channel reaches a
/// subscriber of another.
inline std::string check_no_cross_channel(std::uint64_t seed, int channels, int messages) {
  statestore::StateStore store;
  std::mt19937_64 rng(seed);
  std::vector<std::string> names;
  std::vector<statestore::Subscription> subs;
  for (int i = 0; i < channels; ++i) {
    names.push_back("fuzz:" + std::to_string(rng()));
    subs.push_back(store.subscribe(names.back()));
  }
  std::vector<std::uint32_t> sent(static_cast<std::size_t>(channels), 0);
  for (int k = 0; k < messages; ++k) {
    const auto c = static_cast<std::uint32_t>(rng() % static_cast<std::uint64_t>(channels));
    store.publish(names[c], tagged(c, sent[c]++));
  }
  for (int i = 0; i < channels; ++i) {
    std::uint32_t got = 0;
    while (auto d = subs[static_cast<std::size_t>(i)].poll()) {
      const auto* m = std::get_if<statestore::Message>(&*d);
      if (!m) continue;
      ByteReader r(*m->payload);
      if (r.u32() != static_cast<std::uint32_t>(i)) return "cross-channel delivery";
      ++got;
    }
    if (got + (sent[static_cast<std::size_t>(i)] > statestore::kSubscriberQueueDepth
                   ? sent[static_cast<std::size_t>(i)] - statestore::kSubscriberQueueDepth
                   : 0) !=
        sent[static_cast<std::size_t>(i)]) {
      return "messages unaccounted for";
    }
  }
  return {};
}

}  // namespace teleop::testing

#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <thread>

#include "teleop/net/connection.hpp"

namespace teleop::loadharness {

/// Emulated wide-area link. Delay applies independently to each direction;
/// loss applies to outbound pose messages only (the session tolerates gaps
/// in the command stream but not in the handshake).
struct LinkParams {
  double delay_ms = 0.0;  // one-way mean
  double sigma_ms = 0.0;
  double loss = 0.0;      // [0, 1)

  [[nodiscard]] bool loopback() const { return delay_ms == 0.0 && sigma_ms == 0.0 && loss == 0.0; }
};

/// "loopback" or "wan:<delay_ms>[:<sigma_ms>[:<loss>]]".
LinkParams parse_link(const std::string& text);
std::string describe(const LinkParams& p);

/// Connection decorator that holds every message for a sampled delay.
/// Order is preserved in both directions, as over TCP.
class LinkShim : public net::Connection {
 public:
  LinkShim(std::unique_ptr<net::Connection> inner, LinkParams params, std::uint64_t seed);
  ~LinkShim() override;

  void send_text(std::string_view text) override;
  void send_binary(ByteView data) override;
  std::optional<net::Incoming> receive(std::chrono::milliseconds timeout) override;
  void close() override;
  [[nodiscard]] bool closed() const override;
  [[nodiscard]] const std::string& peer_ip() const override { return inner_->peer_ip(); }
  [[nodiscard]] bool is_websocket() const override { return inner_->is_websocket(); }

  [[nodiscard]] std::uint64_t lost() const;

 private:
  using Clock = std::chrono::steady_clock;
  struct Held {
    Clock::time_point release;
    net::Incoming message;
    bool eof = false;
  };

  Clock::time_point release_time(Clock::time_point& last);
  void pump_out();
  void pump_in();

  std::unique_ptr<net::Connection> inner_;
  const LinkParams params_;

  mutable std::mutex mu_;
  std::condition_variable out_cv_, in_cv_, drained_cv_;
  std::mt19937_64 rng_;
  std::deque<Held> out_, in_;
  Clock::time_point last_out_{}, last_in_{};
  bool closed_ = false;
  std::uint64_t lost_ = 0;
  std::thread out_thread_, in_thread_;
};

}  // namespace teleop::loadharness

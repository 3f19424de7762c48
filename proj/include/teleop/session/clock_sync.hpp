#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <span>

namespace teleop::session {

/// One ping round trip. t0 and t1 are client send/receive times, t_server the
/// server stamp; all in the same unit.
struct PingExchange {
  double t0 = 0.0;
  double t_server = 0.0;
  double t1 = 0.0;
};

inline constexpr std::size_t kMinPings = 3;

/// Median over exchanges of t_server - (t0 + t1) / 2: the server clock minus
/// the client clock. Throws Error(TooFewPings) below kMinPings exchanges.
double estimate_clock_offset(std::span<const PingExchange> pings);

/// Offset estimate for clients that never report t1: median of t_server - t0,
/// which absorbs one uplink delay into the offset.
double estimate_clock_offset_one_way(std::span<const double> t_server_minus_t0);

/// Rolling estimator: keeps the most recent exchanges and re-estimates at
/// most once per `period`.
class ClockSync {
 public:
  explicit ClockSync(double period, std::size_t window = 9) : period_(period), window_(window) {}

  void seed(double offset, double now) {
    offset_ = offset;
    last_estimate_ = now;
  }

  /// Returns the new offset when this exchange triggered a re-estimate.
  std::optional<double> add(const PingExchange& p, double now);

  [[nodiscard]] double offset() const { return offset_; }

 private:
  double period_;
  std::size_t window_;
  std::deque<PingExchange> recent_;
  double offset_ = 0.0;
  double last_estimate_ = 0.0;
};

}  // namespace teleop::session

#include "teleop/session/clock_sync.hpp"

#include <vector>

#include "teleop/core/errors.hpp"
#include "teleop/core/stats.hpp"

namespace teleop::session {

double estimate_clock_offset(std::span<const PingExchange> pings) {
  if (pings.size() < kMinPings) {
    throw Error(ErrorCode::TooFewPings, "clock sync needs at least 3 exchanges, got " + std::to_string(pings.size()));
  }
  std::vector<double> mids;
  mids.reserve(pings.size());
  for (const auto& p : pings) mids.push_back(p.t_server - (p.t0 + p.t1) / 2.0);
  return median(mids);
}

double estimate_clock_offset_one_way(std::span<const double> t_server_minus_t0) {
  if (t_server_minus_t0.size() < kMinPings) {
    throw Error(ErrorCode::TooFewPings, "clock sync needs at least 3 pings");
  }
  return median(t_server_minus_t0);
}

std::optional<double> ClockSync::add(const PingExchange& p, double now) {
  recent_.push_back(p);
  while (recent_.size() > window_) recent_.pop_front();
  if (recent_.size() < kMinPings || now - last_estimate_ < period_) return std::nullopt;
  const std::vector<PingExchange> v(recent_.begin(), recent_.end());
  offset_ = estimate_clock_offset(v);
  last_estimate_ = now;
  return offset_;
}

}  // namespace teleop::session

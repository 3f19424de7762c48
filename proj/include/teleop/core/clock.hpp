#pragma once

#include <chrono>

namespace teleop {

/// Server clock in seconds. Monotonic; the epoch is arbitrary but shared by
/// every thread in the process.
inline double now_seconds() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

inline double seconds_to_ms(double s) { return s * 1e3; }
inline double ms_to_seconds(double ms) { return ms * 1e-3; }

}  // namespace teleop

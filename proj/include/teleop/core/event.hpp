#pragma once

#include <optional>
#include <string_view>

#include "teleop/geometry/pose.hpp"

namespace teleop {

enum class EventKind {
  success,
  timeout,
  reset,          // episode respawned in place (after timeout or client request)
  reset_request,  // client asked for a reset; consumed on this tick
  target_hit,     // curriculum target acquired within tolerance
  target_miss,    // curriculum target expired before acquisition
  beam_exit,      // effector left the beam corridor
  grasp,
  release,
};

std::string_view to_string(EventKind kind);
std::optional<EventKind> event_kind_from_string(std::string_view s);

/// Something that happened to one environment during one tick. For target
/// events `target` holds the target pose at the acquisition instant.
struct Event {
  EventKind kind = EventKind::success;
  std::optional<geometry::Pose> target;

  friend bool operator==(const Event&, const Event&) = default;
};

}  // namespace teleop

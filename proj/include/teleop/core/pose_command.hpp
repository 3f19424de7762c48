#pragma once

#include <cstdint>
#include <optional>

#include "teleop/core/bytes.hpp"
#include "teleop/geometry/quaternion.hpp"
#include "teleop/geometry/vec3.hpp"

namespace teleop {

/// One accepted client command: a world-frame delta pose plus absolute
/// gripper state. Times are seconds; t_client is on the client clock,
/// t_receive on the server clock, clock_offset is server minus client.
struct PoseCommand {
  std::uint64_t seq = 0;
  double t_client = 0.0;
  double t_receive = 0.0;
  double clock_offset = 0.0;
  geometry::Vec3 dpos;
  geometry::Quaternion drot;
  bool gripper_closed = false;

  /// One-way latency corrected for the estimated clock offset.
  [[nodiscard]] double corrected_latency() const { return t_receive - (t_client + clock_offset); }

  friend bool operator==(const PoseCommand&, const PoseCommand&) = default;
};

/// Fixed 97-byte little-endian encoding used on store channels.
Bytes encode_pose_command(const PoseCommand& cmd);
PoseCommand decode_pose_command(ByteView bytes);

}  // namespace teleop

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "teleop/geometry/pose.hpp"
#include "teleop/simcore/env_state.hpp"
#include "teleop/simcore/task.hpp"

namespace teleop::simcore {

inline constexpr std::uint8_t kSnapshotSchema = 1;

struct TargetOverlay {
  geometry::Pose pose;
  double position_tolerance = 0.0;
  double rotation_tolerance = 0.0;
  std::uint32_t ticks_left = 0;

  friend bool operator==(const TargetOverlay&, const TargetOverlay&) = default;
};

/// Scene description sent to display clients after every tick.
struct FrameSnapshot {
  std::uint8_t schema = kSnapshotSchema;
  std::uint32_t env_index = 0;
  std::uint64_t tick = 0;
  double t_server = 0.0;  // s
  TaskId task = TaskId::lift;
  EpisodeStatus status = EpisodeStatus::running;
  std::uint64_t episode = 0;
  std::uint64_t last_cmd_seq = 0;

  geometry::Pose effector;
  bool gripper_closed = false;
  double table_z = kTableZ;
  std::vector<SceneObject> objects;

  std::optional<TargetOverlay> target;
  std::optional<BeamSegment> beam;
  std::uint32_t targets_done = 0;
  std::uint32_t targets_total = 0;
  std::uint32_t hits = 0;
  std::uint32_t misses = 0;
  std::int64_t reset_count = 0;

  friend bool operator==(const FrameSnapshot&, const FrameSnapshot&) = default;
};

}  // namespace teleop::simcore

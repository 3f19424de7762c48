#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "teleop/core/pose_command.hpp"
#include "teleop/geometry/pose.hpp"
#include "teleop/simcore/task.hpp"

namespace teleop::simcore {

enum class Shape : std::uint8_t { cube, sphere, beam_target };

enum class EpisodeStatus : std::uint8_t { running, success, reset_pending };

struct SceneObject {
  std::uint8_t id = 0;
  Shape shape = Shape::cube;
  geometry::Pose pose;
  double half_extent = 0.025;
  bool grasped = false;

  friend bool operator==(const SceneObject&, const SceneObject&) = default;
};

struct Target {
  geometry::Pose pose;
  std::uint32_t ticks_left = 0;  // 0 when the target does not expire

  friend bool operator==(const Target&, const Target&) = default;
};

struct BeamSegment {
  geometry::Vec3 start;
  geometry::Vec3 end;
  double thickness = 0.0;
  bool armed = false;  // effector has touched the start and stayed inside

  friend bool operator==(const BeamSegment&, const BeamSegment&) = default;
};

/// Complete state of one environment. Two states that compare equal evolve
/// identically under the same commands.
struct EnvState {
  geometry::Pose effector;
  bool gripper_closed = false;
  std::vector<SceneObject> objects;
  std::optional<geometry::Pose> grasp_offset;  // grasped object in the effector frame

  std::optional<Target> target;
  std::optional<BeamSegment> beam;
  std::uint32_t targets_done = 0;
  std::uint32_t hits = 0;
  std::uint32_t misses = 0;

  std::uint64_t tick = 0;
  std::uint64_t episode = 0;
  std::uint64_t episode_ticks = 0;
  EpisodeStatus status = EpisodeStatus::running;
  std::int64_t reset_count = 0;
  std::uint64_t spawn_key = 0;
  std::uint64_t rng_state = 0;

  std::optional<PoseCommand> pending;
  std::uint64_t last_cmd_seq = 0;

  [[nodiscard]] int grasped_count() const {
    int n = 0;
    for (const auto& o : objects) n += o.grasped ? 1 : 0;
    return n;
  }

  friend bool operator==(const EnvState&, const EnvState&) = default;
};

/// Canonical binary form of every field; the basis of state hashing.
Bytes serialize_state(const EnvState& s);

/// 64-bit FNV-1a over serialize_state.
std::uint64_t hash_state(const EnvState& s);

/// hash_state with the tick and episode_ticks clocks zeroed: the part of the
/// state that only commands, task events and resets can change.
std::uint64_t hash_world(const EnvState& s);

}  // namespace teleop::simcore

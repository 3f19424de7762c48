#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "teleop/geometry/vec3.hpp"

namespace teleop::simcore {

enum class TaskId : std::uint8_t {
  position_calibration,
  rotation_calibration,
  pose_calibration,
  position_eval,
  rotation_eval,
  pose_eval,
  beam_precision,
  lift,
  stack,
};

std::string_view task_name(TaskId id);
std::optional<TaskId> task_from_name(std::string_view name);

struct Box {
  geometry::Vec3 lo;
  geometry::Vec3 hi;

  [[nodiscard]] bool contains(const geometry::Vec3& p) const {
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y && p.z >= lo.z && p.z <= hi.z;
  }
};

inline constexpr double kTickHz = 20.0;
inline constexpr double kTickPeriod = 1.0 / kTickHz;
inline constexpr double kMaxStepTranslation = 0.05;  // m per tick
inline constexpr double kMaxStepRotation = 0.2;      // rad per tick
inline constexpr double kTableZ = 0.0;
inline const Box kWorkspace{{-1.0, -1.0, -1.0}, {1.0, 1.0, 1.0}};

/// A task kind and all of its tunables. Distances in meters, angles in
/// radians, durations in ticks (0 means "no limit").
struct TaskParams {
  TaskId id = TaskId::lift;

  // Curriculum targets.
  std::uint32_t targets_per_episode = 5;
  double position_tolerance = 0.03;
  double rotation_tolerance = 0.1;
  std::uint32_t target_lifetime_ticks = 0;
  Box target_spawn{{-0.4, -0.4, 0.1}, {0.4, 0.4, 0.5}};
  double max_target_rotation = 1.0;

  // Beam tracing: one segment per thickness entry, thinnest last.
  std::vector<double> beam_thickness{0.08, 0.06, 0.04, 0.02};
  double beam_length = 0.4;

  // Manipulation.
  double lift_height = 0.20;
  double grasp_radius = 0.06;
  double cube_half_extent = 0.025;
  Box cube_spawn{{-0.3, -0.3, 0.0}, {0.3, 0.3, 0.0}};
  double stack_lateral_tolerance = 0.04;

  std::uint32_t episode_time_limit_ticks = 1200;

  geometry::Vec3 home_position{0.0, 0.0, 0.3};

  [[nodiscard]] bool is_curriculum() const;
  [[nodiscard]] bool is_eval() const;
  [[nodiscard]] bool checks_position() const;
  [[nodiscard]] bool checks_rotation() const;
};

/// Default parameters for a task kind.
TaskParams make_task(TaskId id);

/// Throws std::invalid_argument when a parameter is not positive.
void validate(const TaskParams& params);

}  // namespace teleop::simcore

#include "teleop/simcore/task.hpp"

#include <array>
#include <stdexcept>
#include <utility>

namespace teleop::simcore {

namespace {
constexpr std::array<std::pair<TaskId, std::string_view>, 9> kTaskNames{{
    {TaskId::position_calibration, "position-calibration"},
    {TaskId::rotation_calibration, "rotation-calibration"},
    {TaskId::pose_calibration, "pose-calibration"},
    {TaskId::position_eval, "position-eval"},
    {TaskId::rotation_eval, "rotation-eval"},
    {TaskId::pose_eval, "pose-eval"},
    {TaskId::beam_precision, "beam-precision"},
    {TaskId::lift, "lift"},
    {TaskId::stack, "stack"},
}};
}  // namespace

std::string_view task_name(TaskId id) {
  for (const auto& [t, name] : kTaskNames) {
    if (t == id) return name;
  }
  return "unknown";
}

std::optional<TaskId> task_from_name(std::string_view name) {
  for (const auto& [t, n] : kTaskNames) {
    if (n == name) return t;
  }
  return std::nullopt;
}

bool TaskParams::is_curriculum() const { return id != TaskId::lift && id != TaskId::stack; }

bool TaskParams::is_eval() const {
  return id == TaskId::position_eval || id == TaskId::rotation_eval || id == TaskId::pose_eval ||
         id == TaskId::beam_precision;
}

bool TaskParams::checks_position() const {
  return id != TaskId::rotation_calibration && id != TaskId::rotation_eval;
}

bool TaskParams::checks_rotation() const {
  return id == TaskId::rotation_calibration || id == TaskId::rotation_eval ||
         id == TaskId::pose_calibration || id == TaskId::pose_eval;
}

TaskParams make_task(TaskId id) {
  TaskParams p;
  p.id = id;
  switch (id) {
    case TaskId::position_calibration:
    case TaskId::rotation_calibration:
    case TaskId::pose_calibration:
      p.episode_time_limit_ticks = 2400;
      break;
    case TaskId::position_eval:
    case TaskId::rotation_eval:
    case TaskId::pose_eval:
      // Targets disappear after 5 s; the episode ends once all were shown.
      p.target_lifetime_ticks = 100;
      p.episode_time_limit_ticks = 0;
      break;
    case TaskId::beam_precision:
      p.episode_time_limit_ticks = 2400;
      break;
    case TaskId::lift:
    case TaskId::stack:
      p.episode_time_limit_ticks = 1200;
      break;
  }
  return p;
}

void validate(const TaskParams& p) {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0)) throw std::invalid_argument(std::string("task parameter must be positive: ") + what);
  };
  positive(p.position_tolerance, "position_tolerance");
  positive(p.rotation_tolerance, "rotation_tolerance");
  positive(p.lift_height, "lift_height");
  positive(p.grasp_radius, "grasp_radius");
  positive(p.cube_half_extent, "cube_half_extent");
  positive(p.stack_lateral_tolerance, "stack_lateral_tolerance");
  positive(p.beam_length, "beam_length");
  positive(p.max_target_rotation, "max_target_rotation");
  positive(static_cast<double>(p.targets_per_episode), "targets_per_episode");
  for (double t : p.beam_thickness) positive(t, "beam_thickness");
  if (p.id == TaskId::beam_precision && p.beam_thickness.empty()) {
    throw std::invalid_argument("beam task needs at least one segment");
  }
  if (p.is_eval() && p.id != TaskId::beam_precision && p.target_lifetime_ticks == 0) {
    throw std::invalid_argument("evaluation tasks need a target lifetime");
  }
}

}  // namespace teleop::simcore

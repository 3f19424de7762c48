#include "teleop/simcore/curriculum.hpp"

#include "teleop/core/errors.hpp"

namespace teleop::simcore {

CurriculumScore score_curriculum(const DemonstrationRecord& record, const TaskParams& task) {
  if (!task.is_curriculum()) {
    throw Error(ErrorCode::WrongTask, std::string(task_name(task.id)) + " is not a curriculum task");
  }
  if (record.header.task != task_name(task.id)) {
    throw Error(ErrorCode::WrongTask,
                "record task " + record.header.task + " does not match " + std::string(task_name(task.id)));
  }

  CurriculumScore score;
  double pos_sum = 0.0;
  double rot_sum = 0.0;
  for (const auto& row : record.rows) {
    for (const auto& e : row.events) {
      if ((e.kind != EventKind::target_hit && e.kind != EventKind::target_miss) || !e.target) continue;
      ++score.targets;
      if (e.kind == EventKind::target_hit) ++score.hits;
      pos_sum += geometry::distance(row.effector.position, e.target->position);
      rot_sum += geometry::relative_rotation_angle(row.effector.orientation, e.target->orientation);
    }
  }
  if (score.targets > 0) {
    const double n = static_cast<double>(score.targets);
    if (task.checks_position()) score.position_error = pos_sum / n;
    if (task.checks_rotation()) score.rotation_error = rot_sum / n;
  }
  return score;
}

}  // namespace teleop::simcore

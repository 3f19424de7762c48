#include "teleop/loadharness/motion.hpp"

#include <algorithm>

#include "teleop/core/errors.hpp"

namespace teleop::loadharness {

using geometry::Quaternion;
using geometry::Vec3;
using simcore::TaskId;

namespace {

constexpr double kGraspSlack = 0.005;  // m
constexpr double kLiftClearance = 0.1;  // m above the success height

Vec3 toward(const Vec3& from, const Vec3& to) { return geometry::clamp_norm(to - from, simcore::kMaxStepTranslation); }

Quaternion turn_toward(const Quaternion& from, const Quaternion& to) {
  Quaternion d = to * geometry::conjugate(from);
  if (d.w < 0) d = -d;
  return geometry::clamp_angle(geometry::normalize(d), simcore::kMaxStepRotation);
}

}  // namespace

bool ScriptedSolver::supports(TaskId task) {
  return task == TaskId::lift || task == TaskId::position_calibration || task == TaskId::pose_calibration;
}

ScriptedSolver::ScriptedSolver(TaskId task) : task_(task) {
  if (!supports(task)) {
    throw Error(ErrorCode::UnsupportedTask, "no scripted solver for " + std::string(simcore::task_name(task)));
  }
}

Action ScriptedSolver::next(const simcore::FrameSnapshot& s) {
  Action a;
  if (s.status != simcore::EpisodeStatus::running) return a;
  const Vec3& p = s.effector.position;
  if (task_ == TaskId::lift) {
    if (s.objects.empty()) return a;
    const auto& cube = s.objects.front();
    if (cube.grasped) {
      a.gripper_closed = true;
      const simcore::TaskParams params = simcore::make_task(TaskId::lift);
      a.dpos = toward(p, {p.x, p.y, s.table_z + params.lift_height + kLiftClearance});
      return a;
    }
    if (geometry::distance(p, cube.pose.position) <= kGraspSlack) {
      a.gripper_closed = true;
      return a;
    }
    a.dpos = toward(p, cube.pose.position);
    return a;
  }
  if (!s.target) return a;
  a.dpos = toward(p, s.target->pose.position);
  if (task_ == TaskId::pose_calibration) a.drot = turn_toward(s.effector.orientation, s.target->pose.orientation);
  return a;
}

Action RandomWalk::next(const simcore::FrameSnapshot& s) {
  std::normal_distribution<double> n(0.0, step_);
  const simcore::TaskParams params = simcore::make_task(s.task);
  Action a;
  // Pull back toward home so the walk stays inside the workspace.
  const Vec3 pull = (params.home_position - s.effector.position) * 0.05;
  a.dpos = geometry::clamp_norm(Vec3{n(rng_), n(rng_), n(rng_)} + pull, simcore::kMaxStepTranslation);
  a.drot = Quaternion::from_axis_angle({n(rng_), n(rng_), n(rng_)}, std::abs(n(rng_)));
  return a;
}

MotionKind motion_from_name(std::string_view name) {
  if (name == "scripted" || name == "scripted-task-solver") return MotionKind::scripted;
  if (name == "random-walk") return MotionKind::random_walk;
  if (name == "zero") return MotionKind::zero;
  throw std::invalid_argument("unknown motion '" + std::string(name) + "'");
}

std::string_view motion_name(MotionKind m) {
  switch (m) {
    case MotionKind::scripted: return "scripted";
    case MotionKind::random_walk: return "random-walk";
    case MotionKind::zero: return "zero";
  }
  return "zero";
}

std::unique_ptr<MotionSource> make_motion(MotionKind kind, TaskId task, std::uint64_t seed) {
  switch (kind) {
    case MotionKind::scripted: return std::make_unique<ScriptedSolver>(task);
    case MotionKind::random_walk: return std::make_unique<RandomWalk>(seed);
    case MotionKind::zero: break;
  }
  return std::make_unique<ZeroMotion>();
}

}  // namespace teleop::loadharness

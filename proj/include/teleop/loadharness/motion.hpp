#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string_view>

#include "teleop/geometry/quaternion.hpp"
#include "teleop/geometry/vec3.hpp"
#include "teleop/simcore/snapshot.hpp"
#include "teleop/simcore/task.hpp"

namespace teleop::loadharness {

/// One operator input for one tick.
struct Action {
  geometry::Vec3 dpos;
  geometry::Quaternion drot;
  bool gripper_closed = false;

  friend bool operator==(const Action&, const Action&) = default;
};

/// Produces an action from the freshest observed scene.
class MotionSource {
 public:
  virtual ~MotionSource() = default;
  virtual Action next(const simcore::FrameSnapshot& scene) = 0;
};

/// Drives straight at the task goal under the per-tick clamps. Supports lift,
/// position-calibration and pose-calibration; throws Error(UnsupportedTask)
/// otherwise.
class ScriptedSolver : public MotionSource {
 public:
  explicit ScriptedSolver(simcore::TaskId task);
  Action next(const simcore::FrameSnapshot& scene) override;

  static bool supports(simcore::TaskId task);

 private:
  simcore::TaskId task_;
};

class ZeroMotion : public MotionSource {
 public:
  Action next(const simcore::FrameSnapshot&) override { return {}; }
};

/// Bounded random wander around the home position.
class RandomWalk : public MotionSource {
 public:
  explicit RandomWalk(std::uint64_t seed, double step = 0.02) : rng_(seed), step_(step) {}
  Action next(const simcore::FrameSnapshot& scene) override;

 private:
  std::mt19937_64 rng_;
  double step_;
};

enum class MotionKind { scripted, random_walk, zero };

MotionKind motion_from_name(std::string_view name);
std::string_view motion_name(MotionKind m);
std::unique_ptr<MotionSource> make_motion(MotionKind kind, simcore::TaskId task, std::uint64_t seed);

}  // namespace teleop::loadharness

#pragma once

#include <span>
#include <vector>

#include "teleop/geometry/pose.hpp"

namespace teleop::metrics {

struct TimedPose {
  double t = 0.0;  // s
  geometry::Pose pose;
};

/// Ordered pose samples with strictly increasing time stamps.
using Trajectory = std::vector<TimedPose>;
using TrajectoryView = std::span<const TimedPose>;

/// Throws Error(TooShort) for an empty trajectory and Error(CorruptRecord)
/// when stamps are not strictly increasing or an orientation is not unit.
void validate(TrajectoryView traj);

}  // namespace teleop::metrics

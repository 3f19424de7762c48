#pragma once

#include "teleop/geometry/quaternion.hpp"
#include "teleop/geometry/vec3.hpp"

namespace teleop::geometry {

struct Pose {
  Vec3 position;
  Quaternion orientation;

  friend constexpr bool operator==(const Pose&, const Pose&) = default;
};

/// Applies a world-frame delta: position is translated by dpos, orientation is
/// pre-multiplied by drot and renormalized.
Pose compose_delta(const Pose& p, const Vec3& dpos, const Quaternion& drot);

/// Rigid transform composition a ∘ b (b expressed in a's frame).
Pose compose(const Pose& a, const Pose& b);
Pose inverse(const Pose& p);

}  // namespace teleop::geometry

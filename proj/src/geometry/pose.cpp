#include "teleop/geometry/pose.hpp"

namespace teleop::geometry {

Pose compose_delta(const Pose& p, const Vec3& dpos, const Quaternion& drot) {
  if (drot == Quaternion::identity()) return {p.position + dpos, p.orientation};
  return {p.position + dpos, normalize(drot * p.orientation)};
}

Pose compose(const Pose& a, const Pose& b) {
  return {a.position + rotate(a.orientation, b.position), normalize(a.orientation * b.orientation)};
}

Pose inverse(const Pose& p) {
  const Quaternion inv = conjugate(p.orientation);
  return {-rotate(inv, p.position), inv};
}

}  // namespace teleop::geometry

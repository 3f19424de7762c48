#pragma once

#include <array>

#include "teleop/geometry/vec3.hpp"

namespace teleop::geometry {

using Mat3 = std::array<std::array<double, 3>, 3>;

/// Orientation quaternion stored as [w, x, y, z] (Hamilton convention).
///
/// Every factory and every operation returning a Quaternion yields a unit
/// quaternion. Plain aggregate construction is allowed so raw, unnormalized
/// values can be fed to normalize(); they are not valid orientations until
/// then.
struct Quaternion {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  static constexpr Quaternion identity() { return {}; }

  /// Rotation of `angle` radians about `axis`. A zero axis yields identity.
  static Quaternion from_axis_angle(const Vec3& axis, double angle);

  /// Rotation vector (axis * angle) to quaternion.
  static Quaternion from_rotation_vector(const Vec3& rv);

  friend constexpr bool operator==(const Quaternion&, const Quaternion&) = default;
};

/// Throws Error(ZeroNorm) when the norm is <= 1e-12.
Quaternion normalize(const Quaternion& q);

double norm(const Quaternion& q);
constexpr double dot(const Quaternion& a, const Quaternion& b) {
  return a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z;
}

constexpr Quaternion conjugate(const Quaternion& q) { return {q.w, -q.x, -q.y, -q.z}; }

/// Hamilton product a ⊗ b (apply b first, then a).
constexpr Quaternion operator*(const Quaternion& a, const Quaternion& b) {
  return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
          a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
          a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
          a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

constexpr Quaternion operator-(const Quaternion& q) { return {-q.w, -q.x, -q.y, -q.z}; }

Vec3 rotate(const Quaternion& q, const Vec3& v);

Mat3 to_matrix(const Quaternion& q);

/// Rotation angle of a unit quaternion in [0, pi].
double rotation_angle(const Quaternion& q);

/// Axis-angle logarithm: axis * angle with angle in [0, pi].
Vec3 to_rotation_vector(const Quaternion& q);

/// Geodesic distance on SO(3) between two orientations, in [0, pi]. Equal to
/// arccos((trace(AᵀB) - 1) / 2) for the corresponding matrices; q and -q are
/// the same orientation.
double relative_rotation_angle(const Quaternion& a, const Quaternion& b);

/// Same orientation within `tol` radians, honoring the double cover.
bool same_orientation(const Quaternion& a, const Quaternion& b, double tol = 1e-9);

/// Shrinks the rotation of q so that its angle does not exceed max_angle.
Quaternion clamp_angle(const Quaternion& q, double max_angle);

}  // namespace teleop::geometry

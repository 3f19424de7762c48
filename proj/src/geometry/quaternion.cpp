#include "teleop/geometry/quaternion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "teleop/core/errors.hpp"

namespace teleop::geometry {

Quaternion Quaternion::from_axis_angle(const Vec3& axis, double angle) {
  const double n = geometry::norm(axis);
  if (n <= 1e-12) return identity();
  const double s = std::sin(angle / 2.0) / n;
  return normalize({std::cos(angle / 2.0), axis.x * s, axis.y * s, axis.z * s});
}

Quaternion Quaternion::from_rotation_vector(const Vec3& rv) {
  return from_axis_angle(rv, geometry::norm(rv));
}

double norm(const Quaternion& q) { return std::sqrt(dot(q, q)); }

Quaternion normalize(const Quaternion& q) {
  const double n = norm(q);
  if (!(n > 1e-12)) {
    throw Error(ErrorCode::ZeroNorm, "cannot normalize a quaternion with norm <= 1e-12");
  }
  return {q.w / n, q.x / n, q.y / n, q.z / n};
}

Vec3 rotate(const Quaternion& q, const Vec3& v) {
  const Quaternion r = q * Quaternion{0.0, v.x, v.y, v.z} * conjugate(q);
  return {r.x, r.y, r.z};
}

Mat3 to_matrix(const Quaternion& q) {
  const double w = q.w, x = q.x, y = q.y, z = q.z;
  return {{{1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)},
           {2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)},
           {2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)}}};
}

double rotation_angle(const Quaternion& q) {
  // atan2 keeps precision for small angles where acos(w) would not.
  const double v = std::sqrt(q.x * q.x + q.y * q.y + q.z * q.z);
  return 2.0 * std::atan2(v, std::abs(q.w));
}

Vec3 to_rotation_vector(const Quaternion& q) {
  const Quaternion h = q.w < 0.0 ? -q : q;
  const double v = std::sqrt(h.x * h.x + h.y * h.y + h.z * h.z);
  if (v <= 1e-300) return {};
  const double angle = 2.0 * std::atan2(v, h.w);
  return Vec3{h.x, h.y, h.z} * (angle / v);
}

double relative_rotation_angle(const Quaternion& a, const Quaternion& b) {
  // Exact zero for repeated samples; the product would leave ~1e-17 residue.
  if (a == b || a == -b) return 0.0;
  const double angle = rotation_angle(conjugate(a) * b);
  return std::clamp(angle, 0.0, std::numbers::pi);
}

bool same_orientation(const Quaternion& a, const Quaternion& b, double tol) {
  return relative_rotation_angle(a, b) <= tol;
}

Quaternion clamp_angle(const Quaternion& q, double max_angle) {
  const Vec3 rv = to_rotation_vector(q);
  const double angle = geometry::norm(rv);
  if (angle <= max_angle) return q;
  return Quaternion::from_axis_angle(rv, max_angle);
}

}  // namespace teleop::geometry

#pragma once

#include <cmath>
#include <random>

#include "teleop/geometry/pose.hpp"
#include "teleop/metrics/trajectory.hpp"

namespace teleop::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline geometry::Vec3 random_vec(Rng& rng, double scale = 1.0) {
  return {uniform(rng, -scale, scale), uniform(rng, -scale, scale), uniform(rng, -scale, scale)};
}

inline geometry::Quaternion random_quaternion(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return geometry::normalize({n(rng), n(rng), n(rng), n(rng)});
}

/// Random small rotation of up to max_angle radians.
inline geometry::Quaternion random_small_rotation(Rng& rng, double max_angle) {
  return geometry::Quaternion::from_axis_angle(random_vec(rng), uniform(rng, 0.0, max_angle));
}

/// Random-walk trajectory with jittered stamps.
inline metrics::Trajectory random_trajectory(Rng& rng, std::size_t n, bool big_rotations = false) {
  metrics::Trajectory traj;
  double t = uniform(rng, 0.0, 1.0);
  geometry::Pose pose{random_vec(rng), random_quaternion(rng)};
  for (std::size_t i = 0; i < n; ++i) {
    traj.push_back({t, pose});
    t += uniform(rng, 0.02, 0.08);
    pose.position += random_vec(rng, 0.05);
    pose.orientation = big_rotations ? random_quaternion(rng)
                                     : geometry::normalize(random_small_rotation(rng, 0.3) * pose.orientation);
  }
  return traj;
}

}  // namespace teleop::testing

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "teleop/core/record.hpp"
#include "teleop/metrics/report.hpp"
#include "teleop/metrics/trajectory.hpp"

namespace teleop::metrics {

inline constexpr std::size_t kDefaultJitterWindow = 10;

/// Sum of Euclidean distances between consecutive positions.
double total_translational_distance(TrajectoryView traj);

/// Sum of geodesic angles between consecutive orientations.
double total_rotational_distance(TrajectoryView traj);

/// Smallest trajectory length accepted by the jitter functions for window L:
/// one full window of L-1 accelerations needs L+1 samples.
constexpr std::size_t min_samples_for_jitter(std::size_t window) { return window + 1; }

/// Mean over stride-1 windows of L-1 consecutive accelerations of the
/// window-maximum |a_t|, where v_t is the scalar speed over sample interval t
/// and a_t = (v_{t+1} - v_t) / ((dt_t + dt_{t+1}) / 2).
/// Throws TooShort when L < 3 or the trajectory has fewer than L+1 samples.
double mean_translational_jitter(TrajectoryView traj, std::size_t window = kDefaultJitterWindow);

/// Rotational analogue with omega_t = theta_t / dt_t.
double mean_rotational_jitter(TrajectoryView traj, std::size_t window = kDefaultJitterWindow);

/// Population standard deviation of consecutive stamp differences.
/// Throws TooShort for fewer than two stamps.
double loop_jitter(std::span<const double> stamps);

/// Effector trajectory of a record, one sample per tick row.
Trajectory trajectory_of(const DemonstrationRecord& demo);

/// Computes every MetricReport field. Throws EmptyDemo for a record
/// without rows.
MetricReport build_report(const DemonstrationRecord& demo,
                          std::size_t window = kDefaultJitterWindow);

}  // namespace teleop::metrics

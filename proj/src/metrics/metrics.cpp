#include "teleop/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "teleop/core/errors.hpp"
#include "teleop/core/stats.hpp"

namespace teleop::metrics {

namespace {

// Mean of sliding-window maxima over `values`, windows of `width` elements,
// stride 1. Monotonic deque, O(n).
double mean_of_window_maxima(const std::vector<double>& values, std::size_t width) {
  const std::size_t windows = values.size() - width + 1;
  std::deque<std::size_t> idx;
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    while (!idx.empty() && values[idx.back()] <= values[i]) idx.pop_back();
    idx.push_back(i);
    if (idx.front() + width <= i) idx.pop_front();
    if (i + 1 >= width) sum += values[idx.front()];
  }
  return sum / static_cast<double>(windows);
}

void check_jitter_input(TrajectoryView traj, std::size_t window) {
  if (window < 3) throw Error(ErrorCode::TooShort, "jitter window must be >= 3");
  if (traj.size() < min_samples_for_jitter(window)) {
    throw Error(ErrorCode::TooShort, "trajectory has " + std::to_string(traj.size()) +
                                         " samples, window " + std::to_string(window) + " needs " +
                                         std::to_string(min_samples_for_jitter(window)));
  }
}

// |a_t| from per-interval rates (speed or angular rate) and interval lengths.
std::vector<double> abs_accelerations(const std::vector<double>& rates, const std::vector<double>& dts) {
  std::vector<double> acc(rates.size() - 1);
  for (std::size_t t = 0; t + 1 < rates.size(); ++t) {
    const double dt_mid = 0.5 * (dts[t] + dts[t + 1]);
    acc[t] = std::abs((rates[t + 1] - rates[t]) / dt_mid);
  }
  return acc;
}

std::vector<double> intervals(TrajectoryView traj) {
  std::vector<double> dts(traj.size() - 1);
  for (std::size_t t = 0; t + 1 < traj.size(); ++t) dts[t] = traj[t + 1].t - traj[t].t;
  return dts;
}

}  // namespace

double total_translational_distance(TrajectoryView traj) {
  double d = 0.0;
  for (std::size_t t = 0; t + 1 < traj.size(); ++t) {
    d += geometry::distance(traj[t + 1].pose.position, traj[t].pose.position);
  }
  return d;
}

double total_rotational_distance(TrajectoryView traj) {
  double d = 0.0;
  for (std::size_t t = 0; t + 1 < traj.size(); ++t) {
    d += geometry::relative_rotation_angle(traj[t].pose.orientation, traj[t + 1].pose.orientation);
  }
  return d;
}

double mean_translational_jitter(TrajectoryView traj, std::size_t window) {
  check_jitter_input(traj, window);
  const auto dts = intervals(traj);
  std::vector<double> speed(dts.size());
  for (std::size_t t = 0; t < dts.size(); ++t) {
    speed[t] = geometry::distance(traj[t + 1].pose.position, traj[t].pose.position) / dts[t];
  }
  return mean_of_window_maxima(abs_accelerations(speed, dts), window - 1);
}

double mean_rotational_jitter(TrajectoryView traj, std::size_t window) {
  check_jitter_input(traj, window);
  const auto dts = intervals(traj);
  std::vector<double> rate(dts.size());
  for (std::size_t t = 0; t < dts.size(); ++t) {
    rate[t] = geometry::relative_rotation_angle(traj[t].pose.orientation, traj[t + 1].pose.orientation) /
              dts[t];
  }
  return mean_of_window_maxima(abs_accelerations(rate, dts), window - 1);
}

double loop_jitter(std::span<const double> stamps) {
  if (stamps.size() < 2) throw Error(ErrorCode::TooShort, "loop jitter needs at least two stamps");
  std::vector<double> diffs(stamps.size() - 1);
  for (std::size_t i = 0; i + 1 < stamps.size(); ++i) diffs[i] = stamps[i + 1] - stamps[i];
  if (diffs.size() == 1) return 0.0;
  return population_stddev(diffs);
}

Trajectory trajectory_of(const DemonstrationRecord& demo) {
  Trajectory traj;
  traj.reserve(demo.rows.size());
  for (const auto& row : demo.rows) traj.push_back({row.t_server, row.effector});
  return traj;
}

MetricReport build_report(const DemonstrationRecord& demo, std::size_t window) {
  if (demo.rows.empty()) throw Error(ErrorCode::EmptyDemo, "demo " + demo.header.demo_id + " has no rows");

  MetricReport r;
  r.demo_id = demo.header.demo_id;
  r.task = demo.header.task;
  r.success = demo.outcome == Outcome::success;
  r.completion_time = demo.rows.back().t_server - demo.rows.front().t_server;

  const Trajectory traj = trajectory_of(demo);
  r.d_trans = total_translational_distance(traj);
  r.d_rot = total_rotational_distance(traj);
  if (traj.size() >= min_samples_for_jitter(window)) {
    r.j_trans = mean_translational_jitter(traj, window);
    r.j_rot = mean_rotational_jitter(traj, window);
  } else {
    r.jitter_undefined = true;
  }

  std::vector<double> server_stamps;
  std::vector<double> client_stamps;
  server_stamps.reserve(demo.rows.size());
  for (const auto& row : demo.rows) {
    server_stamps.push_back(row.t_server);
    if (row.command) client_stamps.push_back(row.command->t_client);
    for (const auto& e : row.events) {
      if (e.kind == EventKind::reset) ++r.reset_count;
    }
  }
  if (server_stamps.size() >= 2) r.server_loop_jitter = loop_jitter(server_stamps);
  if (client_stamps.size() >= 2) r.client_loop_jitter = loop_jitter(client_stamps);
  r.no_commands = client_stamps.empty();

  std::vector<double> corrected;
  corrected.reserve(demo.latency.size());
  for (const auto& s : demo.latency) corrected.push_back(s.corrected());
  r.latency.median = median(corrected);
  r.latency.p95 = percentile_nearest_rank(corrected, 95.0);
  return r;
}

}  // namespace teleop::metrics

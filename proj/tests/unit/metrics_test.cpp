#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "support/generators.hpp"
#include "support/oracles.hpp"
#include "teleop/core/errors.hpp"
#include "teleop/core/stats.hpp"
#include "teleop/metrics/filter.hpp"
#include "teleop/metrics/metrics.hpp"

namespace teleop::metrics {
namespace {

using geometry::Pose;
using geometry::Quaternion;
using geometry::Vec3;
using teleop::testing::Rng;
using teleop::testing::random_trajectory;
using teleop::testing::uniform;
namespace oracle = teleop::testing::oracle;

constexpr double kPi = std::numbers::pi;

Trajectory line(std::initializer_list<Vec3> points, double dt = 1.0) {
  Trajectory traj;
  double t = 0.0;
  for (const auto& p : points) {
    traj.push_back({t, Pose{p, Quaternion::identity()}});
    t += dt;
  }
  return traj;
}

Trajectory yaw_sequence(std::initializer_list<double> angles, double dt = 1.0) {
  Trajectory traj;
  double t = 0.0;
  for (double a : angles) {
    traj.push_back({t, Pose{{}, Quaternion::from_axis_angle({0, 0, 1}, a)}});
    t += dt;
  }
  return traj;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::ConnectionClosed;  // sentinel: nothing thrown
}

TEST(TranslationalDistance, TwoUnitSteps) {
  EXPECT_DOUBLE_EQ(total_translational_distance(line({{0, 0, 0}, {1, 0, 0}, {1, 1, 0}})), 2.0);
}

TEST(TranslationalDistance, SingleSample) {
  EXPECT_EQ(total_translational_distance(line({{0.3, 0.2, 0.1}})), 0.0);
}

TEST(TranslationalDistance, MatchesPairwiseOracle) {
  Rng rng(10);
  for (int i = 0; i < 50; ++i) {
    const auto traj = random_trajectory(rng, 50);
    EXPECT_TRUE(oracle::close_rel(total_translational_distance(traj), oracle::translational_distance(traj), 1e-9));
  }
}

TEST(TranslationalDistance, IgnoresStampsAndRigidRotation) {
  Rng rng(11);
  const auto traj = random_trajectory(rng, 80);
  const double base = total_translational_distance(traj);

  Trajectory retimed = traj;
  double t = 0.0;
  for (auto& s : retimed) s.t = (t += uniform(rng, 0.001, 1.0));
  EXPECT_DOUBLE_EQ(total_translational_distance(retimed), base);

  const auto r = teleop::testing::random_quaternion(rng);
  Trajectory rotated = traj;
  for (auto& s : rotated) s.pose.position = geometry::rotate(r, s.pose.position);
  EXPECT_TRUE(oracle::close_rel(total_translational_distance(rotated), base, 1e-12));
}

TEST(TranslationalDistance, SubsamplingNeverIncreases) {
  Rng rng(12);
  for (int i = 0; i < 100; ++i) {
    const auto traj = random_trajectory(rng, 60);
    Trajectory sub;
    for (std::size_t k = 0; k < traj.size(); ++k) {
      if (k == 0 || k + 1 == traj.size() || uniform(rng, 0, 1) < 0.5) sub.push_back(traj[k]);
    }
    EXPECT_LE(total_translational_distance(sub), total_translational_distance(traj) + 1e-12);
  }
}

TEST(RotationalDistance, ConstantOrientation) {
  EXPECT_EQ(total_rotational_distance(yaw_sequence({0, 0, 0, 0})), 0.0);
}

TEST(RotationalDistance, TwoQuarterTurns) {
  EXPECT_NEAR(total_rotational_distance(yaw_sequence({0, kPi / 2, kPi})), kPi, 1e-12);
}

TEST(RotationalDistance, MatchesTraceOracle) {
  Rng rng(13);
  for (int i = 0; i < 50; ++i) {
    const auto traj = random_trajectory(rng, 50, i % 2 == 0);
    EXPECT_TRUE(oracle::close_rel(total_rotational_distance(traj), oracle::rotational_distance(traj), 1e-9));
  }
}

TEST(RotationalDistance, InvariantUnderRightMultiplication) {
  Rng rng(14);
  const auto traj = random_trajectory(rng, 80);
  const auto r = teleop::testing::random_quaternion(rng);
  Trajectory moved = traj;
  for (auto& s : moved) s.pose.orientation = geometry::normalize(s.pose.orientation * r);
  EXPECT_TRUE(oracle::close_rel(total_rotational_distance(moved), total_rotational_distance(traj), 1e-9));
}

TEST(TranslationalJitter, ConstantVelocityIsZero) {
  EXPECT_EQ(mean_translational_jitter(line({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}, {4, 0, 0}}), 3), 0.0);
}

TEST(TranslationalJitter, SpeedStepExample) {
  // speeds 1,1,2,2 at dt=1: accelerations {0,1,0}; two windows of two, both
  // with max 1. The naive oracle agrees.
  const auto traj = line({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {4, 0, 0}, {6, 0, 0}});
  EXPECT_DOUBLE_EQ(oracle::translational_jitter(traj, 3), 1.0);
  EXPECT_DOUBLE_EQ(mean_translational_jitter(traj, 3), 1.0);
}

TEST(TranslationalJitter, TooShort) {
  const auto traj = line({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}});
  EXPECT_EQ(code_of([&] { (void)mean_translational_jitter(traj, 3); }), ErrorCode::TooShort);
  EXPECT_EQ(code_of([&] { (void)mean_translational_jitter(traj, 2); }), ErrorCode::TooShort);
  EXPECT_EQ(min_samples_for_jitter(3), 4u);
  EXPECT_NO_THROW((void)mean_translational_jitter(line({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}}), 3));
}

TEST(TranslationalJitter, MatchesNaiveOracle) {
  Rng rng(15);
  for (std::size_t window : {3u, 5u, 10u, 25u}) {
    for (int i = 0; i < 20; ++i) {
      const auto traj = random_trajectory(rng, 200);
      EXPECT_TRUE(oracle::close_rel(mean_translational_jitter(traj, window),
                                    oracle::translational_jitter(traj, window), 1e-9));
    }
  }
}

TEST(TranslationalJitter, PositiveWhenAnyAccelerationNonzero) {
  auto traj = line({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}, {4, 0, 0}, {5, 0, 0}, {6, 0, 0}});
  traj[6].pose.position.x = 6.001;
  EXPECT_GT(mean_translational_jitter(traj, 3), 0.0);
}

TEST(RotationalJitter, ConstantRateIsZero) {
  EXPECT_NEAR(mean_rotational_jitter(yaw_sequence({0, 0.1, 0.2, 0.3, 0.4, 0.5}), 3), 0.0, 1e-12);
}

TEST(RotationalJitter, ConstantOrientationIsZero) {
  EXPECT_EQ(mean_rotational_jitter(yaw_sequence({0, 0, 0, 0, 0}), 3), 0.0);
}

TEST(RotationalJitter, MatchesNaiveOracle) {
  Rng rng(16);
  for (std::size_t window : {3u, 10u}) {
    for (int i = 0; i < 20; ++i) {
      const auto traj = random_trajectory(rng, 200);
      EXPECT_TRUE(oracle::close_rel(mean_rotational_jitter(traj, window),
                                    oracle::rotational_jitter(traj, window), 1e-9));
    }
  }
}

TEST(LoopJitter, Periodic) {
  const std::vector<double> s{0, .05, .10, .15};
  EXPECT_NEAR(loop_jitter(s), 0.0, 1e-15);
}

TEST(LoopJitter, Alternating) {
  const std::vector<double> s{0, .04, .10, .14, .20};
  EXPECT_NEAR(loop_jitter(s), 0.01, 1e-12);
}

TEST(LoopJitter, MatchesTwoPassOracle) {
  Rng rng(17);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> s;
    double t = uniform(rng, 0, 100);
    for (int k = 0; k < 300; ++k) s.push_back(t += uniform(rng, 0.03, 0.07));
    EXPECT_TRUE(oracle::close_rel(loop_jitter(s), oracle::loop_jitter(s), 1e-12));
  }
}

TEST(LoopJitter, TooShort) {
  const std::vector<double> s{1.0};
  EXPECT_EQ(code_of([&] { (void)loop_jitter(s); }), ErrorCode::TooShort);
}

// Record fixture: rows every 50 ms with a command on every row.
DemonstrationRecord synthetic_demo(Rng& rng, const std::string& id, std::size_t rows, int resets) {
  DemonstrationRecord demo;
  demo.header.demo_id = id;
  demo.header.task = "lift";
  demo.outcome = Outcome::success;
  const auto traj = random_trajectory(rng, rows);
  for (std::size_t i = 0; i < rows; ++i) {
    TickRow row;
    row.tick = i;
    row.t_server = traj[i].t;
    row.effector = traj[i].pose;
    PoseCommand cmd;
    cmd.seq = i + 1;
    cmd.t_client = traj[i].t - 0.12 - uniform(rng, 0.01, 0.02);
    cmd.t_receive = traj[i].t;
    cmd.clock_offset = 0.1;
    row.command = cmd;
    if (static_cast<int>(i) < resets) row.events.push_back({EventKind::reset, std::nullopt});
    demo.rows.push_back(row);
    demo.latency.push_back({cmd.seq, cmd.t_client, cmd.t_receive, cmd.clock_offset});
  }
  demo.reset_count = resets;
  return demo;
}

MetricReport reference_report(const DemonstrationRecord& demo, std::size_t window) {
  MetricReport r;
  r.demo_id = demo.header.demo_id;
  r.task = demo.header.task;
  r.success = demo.outcome == Outcome::success;
  Trajectory traj;
  std::vector<double> server, client, lat;
  for (const auto& row : demo.rows) {
    traj.push_back({row.t_server, row.effector});
    server.push_back(row.t_server);
    if (row.command) client.push_back(row.command->t_client);
    for (const auto& e : row.events) r.reset_count += e.kind == EventKind::reset ? 1 : 0;
  }
  r.completion_time = server.back() - server.front();
  r.d_trans = oracle::translational_distance(traj);
  r.d_rot = oracle::rotational_distance(traj);
  r.j_trans = oracle::translational_jitter(traj, window);
  r.j_rot = oracle::rotational_jitter(traj, window);
  r.server_loop_jitter = oracle::loop_jitter(server);
  r.client_loop_jitter = oracle::loop_jitter(client);
  for (const auto& s : demo.latency) lat.push_back(s.server_receive - s.client_send - s.clock_offset);
  std::sort(lat.begin(), lat.end());
  const std::size_t n = lat.size();
  r.latency.median = n % 2 ? lat[n / 2] : (lat[n / 2 - 1] + lat[n / 2]) / 2;
  r.latency.p95 = lat[static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(n))) - 1];
  return r;
}

TEST(BuildReport, SyntheticTenSecondDemo) {
  DemonstrationRecord demo;
  demo.header.demo_id = "d0";
  demo.header.task = "lift";
  demo.outcome = Outcome::success;
  for (int i = 0; i <= 200; ++i) {
    TickRow row;
    row.tick = static_cast<std::uint64_t>(i);
    row.t_server = 5.0 + 0.05 * i;
    row.effector.position = {0.01 * i, 0, 0.3};
    demo.rows.push_back(row);
  }
  const auto r = build_report(demo);
  EXPECT_EQ(r.demo_id, "d0");
  EXPECT_EQ(r.task, "lift");
  EXPECT_TRUE(r.success);
  EXPECT_NEAR(r.completion_time, 10.0, 1e-9);
  EXPECT_NEAR(r.d_trans, 2.0, 1e-9);
  EXPECT_EQ(r.d_rot, 0.0);
  EXPECT_EQ(r.reset_count, 0);
  EXPECT_TRUE(r.no_commands);
  EXPECT_FALSE(r.jitter_undefined);
}

TEST(BuildReport, CountsOneReset) {
  Rng rng(18);
  const auto r = build_report(synthetic_demo(rng, "d1", 40, 1));
  EXPECT_EQ(r.reset_count, 1);
}

TEST(BuildReport, EmptyDemo) {
  DemonstrationRecord demo;
  EXPECT_EQ(code_of([&] { (void)build_report(demo); }), ErrorCode::EmptyDemo);
}

TEST(BuildReport, ShortDemoFlagsJitter) {
  Rng rng(19);
  const auto r = build_report(synthetic_demo(rng, "short", 5, 0), 10);
  EXPECT_TRUE(r.jitter_undefined);
  EXPECT_EQ(r.j_trans, 0.0);
  EXPECT_EQ(r.j_rot, 0.0);
}

TEST(BuildReport, MatchesReferenceBuilder) {
  Rng rng(20);
  for (int i = 0; i < 20; ++i) {
    const auto demo = synthetic_demo(rng, "d" + std::to_string(i), 30 + 10 * i, i % 3);
    const auto got = build_report(demo);
    const auto want = reference_report(demo, kDefaultJitterWindow);
    EXPECT_EQ(got.demo_id, want.demo_id);
    EXPECT_EQ(got.task, want.task);
    EXPECT_EQ(got.success, want.success);
    EXPECT_EQ(got.reset_count, want.reset_count);
    EXPECT_EQ(got.completion_time, want.completion_time);
    EXPECT_TRUE(oracle::close_rel(got.d_trans, want.d_trans, 1e-9));
    EXPECT_TRUE(oracle::close_rel(got.d_rot, want.d_rot, 1e-9));
    EXPECT_TRUE(oracle::close_rel(got.j_trans, want.j_trans, 1e-9));
    EXPECT_TRUE(oracle::close_rel(got.j_rot, want.j_rot, 1e-9));
    EXPECT_TRUE(oracle::close_rel(got.server_loop_jitter, want.server_loop_jitter, 1e-9));
    EXPECT_TRUE(oracle::close_rel(got.client_loop_jitter, want.client_loop_jitter, 1e-9));
    EXPECT_TRUE(oracle::close_rel(got.latency.median, want.latency.median, 1e-12));
    EXPECT_TRUE(oracle::close_rel(got.latency.p95, want.latency.p95, 1e-12));
  }
}

MetricReport report_with(std::string id, double d_trans, std::string task = "lift", bool success = true) {
  MetricReport r;
  r.demo_id = std::move(id);
  r.task = std::move(task);
  r.d_trans = d_trans;
  r.success = success;
  return r;
}

std::string pad(int i) {
  std::string s = std::to_string(i);
  return std::string(3 - s.size(), '0') + s;
}

TEST(FilterByPercentile, HalfOfHundred) {
  std::vector<MetricReport> reports;
  for (int i = 1; i <= 100; ++i) reports.push_back(report_with("d" + pad(i), i));
  const auto ids = filter_by_percentile(reports, 50, {});
  ASSERT_EQ(ids.size(), 50u);
  for (int i = 1; i <= 50; ++i) EXPECT_EQ(ids[static_cast<std::size_t>(i - 1)], "d" + pad(i));
}

TEST(FilterByPercentile, SingleDemo) {
  const std::vector<MetricReport> reports{report_with("only", 3.0)};
  EXPECT_EQ(filter_by_percentile(reports, 50, {}), std::vector<std::string>{"only"});
}

TEST(FilterByPercentile, HundredKeepsAllSuccessful) {
  std::vector<MetricReport> reports;
  for (int i = 0; i < 30; ++i) reports.push_back(report_with("d" + pad(i), i % 7, "lift", i % 5 != 0));
  const auto ids = filter_by_percentile(reports, 100, {});
  EXPECT_EQ(ids.size(), 24u);
}

TEST(FilterByPercentile, RejectsBadPercent) {
  const std::vector<MetricReport> reports{report_with("a", 1)};
  EXPECT_THROW((void)filter_by_percentile(reports, 0, {}), std::invalid_argument);
  EXPECT_THROW((void)filter_by_percentile(reports, 100.5, {}), std::invalid_argument);
}

TEST(FilterByPercentile, PathLengthAddsWeightedRotation) {
  auto a = report_with("a", 1.0);
  a.d_rot = 10.0;
  auto b = report_with("b", 2.0);
  b.d_rot = 0.0;
  const std::vector<MetricReport> reports{a, b};
  EXPECT_EQ(filter_by_percentile(reports, 50, {MetricKey::d_trans, 0.5}), std::vector<std::string>{"a"});
  EXPECT_EQ(filter_by_percentile(reports, 50, {MetricKey::path_length, 0.5}), std::vector<std::string>{"b"});
}

TEST(FilterByPercentile, MatchesSortAndSliceOracle) {
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<MetricReport> reports;
    const int n = 1 + static_cast<int>(uniform(rng, 0, 60));
    for (int i = 0; i < n; ++i) {
      reports.push_back(report_with("d" + pad(i), uniform(rng, 0, 10), uniform(rng, 0, 1) < 0.5 ? "lift" : "stack",
                                    uniform(rng, 0, 1) < 0.8));
    }
    const double p = uniform(rng, 0.5, 100);
    std::set<std::string> want;
    for (const char* task : {"lift", "stack"}) {
      std::vector<const MetricReport*> group;
      for (const auto& r : reports) {
        if (r.success && r.task == task) group.push_back(&r);
      }
      std::sort(group.begin(), group.end(), [](auto* x, auto* y) { return x->d_trans < y->d_trans; });
      // Distinct values: exactly ceil(n*p/100) survive.
      const auto keep = static_cast<std::size_t>(std::ceil(static_cast<double>(group.size()) * p / 100.0 - 1e-9));
      for (std::size_t k = 0; k < keep; ++k) want.insert(group[k]->demo_id);
    }
    const auto got = filter_by_percentile(reports, p, {});
    EXPECT_EQ(std::set<std::string>(got.begin(), got.end()), want);
    EXPECT_TRUE(std::is_sorted(got.begin(), got.end()));
  }
}

TEST(Stats, NearestRankPercentile) {
  const std::vector<double> v{5, 1, 4, 2, 3};
  EXPECT_EQ(percentile_nearest_rank(v, 100), 5);
  EXPECT_EQ(percentile_nearest_rank(v, 50), 3);
  EXPECT_EQ(percentile_nearest_rank(v, 20), 1);
  EXPECT_EQ(percentile_nearest_rank(v, 21), 2);
  EXPECT_EQ(median(v), 3);
  const std::vector<double> even{1, 2, 3, 4};
  EXPECT_EQ(median(even), 2.5);
}

}  // namespace
}  // namespace teleop::metrics

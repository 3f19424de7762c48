#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <cstring>
#include <set>
#include <sstream>

#include "support/records.hpp"
#include "teleop/core/errors.hpp"
#include "teleop/datapipe/dataset.hpp"
#include "teleop/datapipe/record_io.hpp"
#include "teleop/datapipe/replay.hpp"
#include "teleop/datapipe/writer.hpp"
#include "teleop/loadharness/offline.hpp"

namespace teleop::datapipe {
namespace {

using testing::line_demo;
using testing::TempDir;

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RecordHeader header(const std::string& id) {
  RecordHeader h;
  h.demo_id = id;
  h.task = "lift";
  h.session = "s1";
  return h;
}

TickRow row_at(std::uint64_t tick) {
  TickRow r;
  r.tick = tick;
  r.t_server = 10.0 + 0.05 * static_cast<double>(tick);
  r.effector.position = {0.001 * static_cast<double>(tick), 0.0, 0.3};
  return r;
}

TEST(Writer, HundredRowsThenFinalize) {
  TempDir dir("writer");
  DemoWriter w(dir.path(), header("d1"));
  for (std::uint64_t t = 1; t <= 100; ++t) w.log_tick(row_at(t));
  const DemonstrationRecord rec = w.finalize(Outcome::failure, 0);
  EXPECT_EQ(rec.rows.size(), 100u);
  ASSERT_TRUE(rec.report.has_value());
  EXPECT_TRUE(w.sealed());
  EXPECT_EQ(read_record(w.path()), rec);
}

TEST(Writer, RejectsOutOfOrderTick) {
  TempDir dir("order");
  DemoWriter w(dir.path(), header("d1"));
  w.log_tick(row_at(7));
  try {
    w.log_tick(row_at(5));
    FAIL() << "expected OutOfOrderTick";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OutOfOrderTick);
  }
  EXPECT_THROW(w.log_tick(row_at(7)), Error);
}

TEST(Writer, EmptyRecordHasNoReport) {
  TempDir dir("empty");
  DemoWriter w(dir.path(), header("d1"));
  EXPECT_FALSE(w.finalize(Outcome::abandoned, 0).report.has_value());
}

TEST(Scan, CrashedWriterIsQuarantined) {
  TempDir dir("crash");
  {
    DemoWriter w(dir.path(), header("crashed"));
    for (std::uint64_t t = 1; t <= 10; ++t) w.log_tick(row_at(t));
    w.abandon_for_test();
  }
  write_record(record_path(dir.path(), "ok"), line_demo("ok", "lift", 5, 1.0));
  const ScanResult s = scan(dir.path());
  EXPECT_EQ(s.sealed.size(), 1u);
  ASSERT_EQ(s.quarantined.size(), 1u);
  EXPECT_EQ(s.quarantined[0].parent_path().filename(), kQuarantineDir);
  EXPECT_TRUE(std::filesystem::exists(s.quarantined[0]));
  EXPECT_FALSE(std::filesystem::exists(record_path(dir.path(), "crashed")));
}

TEST(Scan, TruncatedFileIsQuarantined) {
  TempDir dir("trunc");
  const auto p = record_path(dir.path(), "t");
  write_record(p, line_demo("t", "lift", 5, 1.0));
  const std::string full = slurp(p);
  std::filesystem::resize_file(p, full.size() / 2);
  const ScanResult s = scan(dir.path());
  EXPECT_TRUE(s.sealed.empty());
  EXPECT_EQ(s.quarantined.size(), 1u);
}

TEST(Scan, LiveWriterIsInProgress) {
  TempDir dir("live");
  DemoWriter w(dir.path(), header("live"));
  w.log_tick(row_at(1));
  const ScanResult s = scan(dir.path());
  EXPECT_EQ(s.in_progress.size(), 1u);
  EXPECT_TRUE(s.quarantined.empty());
  w.finalize(Outcome::failure, 0);
  EXPECT_EQ(scan(dir.path()).sealed.size(), 1u);
}

TEST(RecordIo, RoundTripIsByteIdentical) {
  TempDir dir("rt");
  loadharness::OfflineRun run;
  run.dir = dir.path();
  run.sessions = 3;
  run.seed = 11;
  const auto recs = loadharness::record_offline(run);
  ASSERT_EQ(recs.size(), 3u);
  for (const auto& rec : recs) {
    const auto p = record_path(dir.path(), rec.header.demo_id);
    const std::string first = slurp(p);
    EXPECT_EQ(serialize(read_record(p)), first);
    EXPECT_EQ(serialize(parse_record(first)), first);
  }
}

TEST(RecordIo, MissingFooterIsCorrupt) {
  const std::string text = serialize(line_demo("x", "lift", 1, 0.5));
  const std::string cut = text.substr(0, text.rfind('\n', text.size() - 2) + 1);
  try {
    parse_record(cut);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CorruptRecord);
  }
}

TEST(Replay, RecordedEpisodesReplayExactly) {
  TempDir dir("replay");
  for (const auto task : {simcore::TaskId::lift, simcore::TaskId::position_calibration,
                          simcore::TaskId::pose_calibration}) {
    loadharness::OfflineRun run;
    run.task = task;
    run.dir = dir.path();
    run.sessions = 2;
    run.n_envs = 4;
    run.demos_per_session = 2;
    run.seed = 5 + static_cast<std::uint64_t>(task);
    run.instance = std::string(simcore::task_name(task));
    const auto recs = loadharness::record_offline(run);
    ASSERT_EQ(recs.size(), 4u);
    for (const auto& rec : recs) {
      EXPECT_EQ(rec.outcome, Outcome::success);
      EXPECT_NO_THROW(replay(read_record(record_path(dir.path(), rec.header.demo_id)))) << rec.header.demo_id;
    }
  }
}

TEST(Replay, BitFlipIsReportedAtItsTick) {
  TempDir dir("flip");
  loadharness::OfflineRun run;
  run.dir = dir.path();
  run.seed = 3;
  DemonstrationRecord rec = loadharness::record_offline(run).at(0);
  ASSERT_GT(rec.rows.size(), 4u);
  TickRow& r = rec.rows[rec.rows.size() / 2];
  std::uint64_t bits;
  std::memcpy(&bits, &r.effector.position.y, sizeof bits);
  bits ^= 1;
  std::memcpy(&r.effector.position.y, &bits, sizeof bits);
  try {
    replay(rec);
    FAIL() << "divergence not detected";
  } catch (const DivergenceError& e) {
    EXPECT_EQ(e.tick(), r.tick);
  }
}

TEST(Replay, ZeroCommandsLeaveInitialState) {
  TempDir dir("zero");
  loadharness::OfflineRun run;
  run.dir = dir.path();
  run.motion = loadharness::MotionKind::zero;
  run.max_ticks = 40;
  run.seed = 9;
  DemonstrationRecord rec = loadharness::record_offline(run).at(0);
  for (auto& row : rec.rows) row.command.reset();

  simcore::EnvBatch fresh(simcore::make_task(simcore::TaskId::lift), rec.header.n_envs, rec.header.seed);
  fresh.assign_to(rec.header.env_index, "x");
  fresh.begin_episode(rec.header.env_index, rec.header.episode);
  const simcore::EnvState initial = fresh.state(rec.header.env_index);

  const simcore::EnvState last = replay(rec);
  EXPECT_EQ(last.effector, initial.effector);
  EXPECT_EQ(last.gripper_closed, initial.gripper_closed);
  EXPECT_EQ(last.objects, initial.objects);
}

TEST(Stats, TenMinuteDemosOneTask) {
  TempDir dir("stats");
  for (int i = 0; i < 10; ++i) {
    const std::string id = "d" + std::to_string(i);
    write_record(record_path(dir.path(), id), line_demo(id, "lift", 60.0, 1.0));
  }
  const DatasetStats s = dataset_stats(dir.path());
  EXPECT_EQ(s.total.demos, 10u);
  EXPECT_EQ(s.per_task.at("lift").demos, 10u);
  EXPECT_NEAR(s.total.hours, 10.0 * 60.0 / 3600.0, 1e-9);
  EXPECT_NEAR(s.total.hours, 0.1667, 5e-5);
}

TEST(Stats, EmptyDirectoryIsZero) {
  TempDir dir("nothing");
  const DatasetStats s = dataset_stats(dir.path());
  EXPECT_TRUE(s.per_task.empty());
  EXPECT_EQ(s.total, TaskStats{});
}

TEST(Stats, FailuresCountAsDemosButNotHours) {
  TempDir dir("fail");
  write_record(record_path(dir.path(), "a"), line_demo("a", "lift", 30, 1.0, Outcome::failure));
  write_record(record_path(dir.path(), "b"), line_demo("b", "lift", 30, 1.0));
  const DatasetStats s = dataset_stats(dir.path());
  EXPECT_EQ(s.total.demos, 2u);
  EXPECT_EQ(s.total.successes, 1u);
  EXPECT_NEAR(s.total.hours, 30.0 / 3600.0, 1e-12);
}

TEST(Stats, TaskPartitionSumsToTotal) {
  TempDir dir("mixed");
  std::mt19937_64 rng(4);
  const char* tasks[] = {"lift", "stack", "pose-calibration"};
  for (int i = 0; i < 45; ++i) {
    const std::string id = "m" + std::to_string(i);
    const double secs = 1.0 + static_cast<double>(rng() % 100);
    const Outcome o = rng() % 4 == 0 ? Outcome::failure : Outcome::success;
    write_record(record_path(dir.path(), id), line_demo(id, tasks[rng() % 3], secs, 1.0, o));
  }
  const DatasetStats s = dataset_stats(dir.path());
  TaskStats sum;
  for (const auto& [task, t] : s.per_task) {
    sum.demos += t.demos;
    sum.successes += t.successes;
    sum.hours += t.hours;
  }
  EXPECT_EQ(sum.demos, s.total.demos);
  EXPECT_EQ(sum.successes, s.total.successes);
  EXPECT_NEAR(sum.hours, s.total.hours, 1e-12);
  EXPECT_EQ(s.total.demos, 45u);
}

// Per-task nearest-rank threshold, computed by sorting.
std::set<std::string> oracle_keep(const std::vector<std::pair<std::string, double>>& demos, double p) {
  std::vector<double> v;
  for (const auto& d : demos) v.push_back(d.second);
  std::sort(v.begin(), v.end());
  const std::size_t rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(v.size())));
  const double threshold = v[std::max<std::size_t>(rank, 1) - 1];
  std::set<std::string> keep;
  for (const auto& d : demos) {
    if (d.second <= threshold) keep.insert(d.first);
  }
  return keep;
}

TEST(Clean, FiftiethPercentileKeepsHalf) {
  TempDir dir("clean");
  for (int i = 0; i < 100; ++i) {
    const std::string id = "c" + std::to_string(i);
    write_record(record_path(dir.path(), id), line_demo(id, "lift", 5.0, 0.5 + 0.01 * i));
  }
  const metrics::KeySelector key{metrics::MetricKey::d_trans};
  EXPECT_EQ(clean(dir.path(), 50, key).kept.size(), 50u);
  EXPECT_EQ(clean(dir.path(), 100, key).kept.size(), 100u);
}

TEST(Clean, PercentileIsPerTask) {
  TempDir dir("twotask");
  std::mt19937_64 rng(8);
  std::vector<std::pair<std::string, double>> lift, stack;
  for (int i = 0; i < 60; ++i) {
    const bool is_lift = i % 3 != 0;
    const std::string id = "p" + std::to_string(i);
    // Stack demos are longer, so a joint threshold would drop all of them.
    const double len = (is_lift ? 0.2 : 2.0) + static_cast<double>(rng() % 1000) * 1e-3;
    const auto rec = line_demo(id, is_lift ? "lift" : "stack", 5.0, len);
    write_record(record_path(dir.path(), id), rec);
    (is_lift ? lift : stack).emplace_back(id, rec.report->d_trans);
  }
  write_record(record_path(dir.path(), "fail"), line_demo("fail", "lift", 5.0, 0.01, Outcome::failure));

  for (const double p : {10.0, 50.0, 75.0}) {
    auto expect = oracle_keep(lift, p);
    const auto s = oracle_keep(stack, p);
    expect.insert(s.begin(), s.end());
    const Manifest m = clean(dir.path(), p, {metrics::MetricKey::d_trans});
    EXPECT_EQ(std::set<std::string>(m.kept.begin(), m.kept.end()), expect) << p;
  }
}

TEST(Clean, StatsOfManifestMatchManifest) {
  TempDir dir("manifest");
  for (int i = 0; i < 30; ++i) {
    const std::string id = "q" + std::to_string(i);
    write_record(record_path(dir.path(), id), line_demo(id, i % 2 ? "lift" : "stack", 5.0, 0.3 + 0.02 * i));
  }
  const Manifest m = clean(dir.path(), 50, {metrics::MetricKey::d_trans});
  write_manifest(dir.path() / "manifest.json", m);
  const Manifest back = read_manifest(dir.path() / "manifest.json");
  EXPECT_EQ(back, m);

  const std::set<std::string> ids(back.kept.begin(), back.kept.end());
  const DatasetStats s = dataset_stats(dir.path(), ids);
  EXPECT_EQ(s.total.demos, m.kept.size());
  std::map<std::string, std::uint64_t> per_task;
  for (const auto& id : m.kept) ++per_task[read_record(record_path(dir.path(), id)).header.task];
  for (const auto& [task, n] : per_task) EXPECT_EQ(s.per_task.at(task).demos, n);
}

}  // namespace
}  // namespace teleop::datapipe

#pragma once

#include <filesystem>
#include <vector>

#include "teleop/core/record.hpp"
#include "teleop/loadharness/motion.hpp"

namespace teleop::loadharness {

/// Records demonstrations without a network or a wall clock: every tick each
/// session plans from the exact current scene.
struct OfflineRun {
  simcore::TaskId task = simcore::TaskId::lift;
  std::uint64_t seed = 1;
  std::size_t n_envs = 1;
  std::size_t sessions = 1;
  MotionKind motion = MotionKind::scripted;
  std::uint64_t demos_per_session = 1;
  std::uint64_t max_ticks = 4000;
  std::filesystem::path dir;
  std::string instance = "offline";
  double t0 = 1000.0;  // s, server time of the first tick
};

/// Returns every sealed record in sealing order. Sessions still running at
/// max_ticks are closed with outcome failure.
std::vector<DemonstrationRecord> record_offline(const OfflineRun& run);

}  // namespace teleop::loadharness

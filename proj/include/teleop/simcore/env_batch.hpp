#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "teleop/core/event.hpp"
#include "teleop/core/pose_command.hpp"
#include "teleop/simcore/env_state.hpp"
#include "teleop/simcore/snapshot.hpp"
#include "teleop/simcore/task.hpp"

namespace teleop::simcore {

inline constexpr std::size_t kMaxBatchSize = 64;

struct IndexedEvent {
  std::uint32_t env = 0;
  Event event;
};

/// Advances one environment by one tick: applies the pending command under
/// the per-tick clamps, updates the grasp binding and evaluates the task.
/// Pure function of (state, params).
std::vector<Event> step_env(EnvState& env, const TaskParams& params);

/// Per-environment random stream key: seed XOR env index.
std::uint64_t spawn_key(std::uint64_t seed, std::uint32_t index);

/// Respawns an episode in place. The episode's random draws are a function of
/// (spawn key, episode) only, so any episode can be reproduced directly.
void respawn(EnvState& env, const TaskParams& params, std::uint64_t key, std::uint64_t episode);

FrameSnapshot make_snapshot(const EnvState& env, const TaskParams& params, std::uint32_t index,
                            double t_server);

/// N independent environments of one task kind stepped together. All public
/// members are safe to call concurrently; step() must be driven by a single
/// thread. A snapshot always reflects exactly one completed tick.
class EnvBatch {
 public:
  /// Throws Error(InvalidCount) unless 1 <= n <= kMaxBatchSize.
  EnvBatch(TaskParams task, std::size_t n, std::uint64_t seed, double tick_period = kTickPeriod);

  EnvBatch(const EnvBatch&) = delete;
  EnvBatch& operator=(const EnvBatch&) = delete;

  /// Reserves the lowest free environment and starts a fresh episode on it.
  /// Throws Error(BatchFull) when every environment is taken.
  std::uint32_t assign(const std::string& session);

  /// Reserves a specific environment (replay). Throws BatchFull if taken.
  void assign_to(std::uint32_t index, const std::string& session);

  /// Throws Error(UnknownSession).
  void release(const std::string& session);

  [[nodiscard]] std::optional<std::uint32_t> env_of(const std::string& session) const;
  [[nodiscard]] std::optional<std::string> session_of(std::uint32_t index) const;
  [[nodiscard]] std::vector<std::uint32_t> assigned_envs() const;

  /// Stores cmd as the pending action for the next tick (latest wins).
  /// Throws Error(Unassigned) for a free environment.
  void apply_command(std::uint32_t index, const PoseCommand& cmd);

  /// The next tick respawns the episode and emits a reset event.
  void request_reset(std::uint32_t index);

  /// Starts a new episode now. Without an explicit number the episode
  /// counter advances by one.
  void begin_episode(std::uint32_t index, std::optional<std::uint64_t> episode = std::nullopt);

  /// Steps every environment once. t_server stamps the resulting snapshots;
  /// when omitted it is derived from the step count.
  std::vector<IndexedEvent> step(std::optional<double> t_server = std::nullopt);

  [[nodiscard]] FrameSnapshot snapshot(std::uint32_t index) const;
  [[nodiscard]] EnvState state(std::uint32_t index) const;

  [[nodiscard]] std::size_t size() const { return envs_.size(); }
  [[nodiscard]] std::size_t assigned_count() const;
  [[nodiscard]] const TaskParams& task() const { return task_; }
  [[nodiscard]] std::uint64_t seed() const { return seed_; }
  [[nodiscard]] double tick_period() const { return tick_period_; }
  [[nodiscard]] std::uint64_t steps() const;

 private:
  void check_index(std::uint32_t index) const;

  const TaskParams task_;
  const std::uint64_t seed_;
  const double tick_period_;

  mutable std::mutex mu_;
  std::vector<EnvState> envs_;
  std::vector<std::optional<std::string>> assignment_;
  std::map<std::string, std::uint32_t> by_session_;
  std::uint64_t steps_ = 0;
  double last_step_time_ = 0.0;
};

}  // namespace teleop::simcore

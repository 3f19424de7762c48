#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "teleop/core/record.hpp"
#include "teleop/datapipe/writer.hpp"
#include "teleop/simcore/env_batch.hpp"

namespace teleop::server {

struct CoreConfig {
  simcore::TaskParams task = simcore::make_task(simcore::TaskId::lift);
  std::size_t n_envs = 4;
  std::uint64_t seed = 1;
  double tick_period = simcore::kTickPeriod;
  std::string instance = "local";
  /// Demonstrations are written here; nothing is recorded when empty.
  std::filesystem::path record_dir;
};

/// Everything one session sent since the previous tick, oldest first.
struct EnvInput {
  std::vector<PoseCommand> commands;
  bool reset = false;
};

struct TickResult {
  std::uint64_t tick = 0;
  std::vector<simcore::IndexedEvent> events;
  std::vector<DemonstrationRecord> sealed;
};

/// The simulation side of an instance without any timing: sessions claim
/// environments, tick() consumes their input, steps the batch and logs one
/// row per assigned environment. A success seals the demonstration and starts
/// the next episode on the same environment.
class TeleopCore {
 public:
  explicit TeleopCore(CoreConfig config);
  ~TeleopCore();

  TeleopCore(const TeleopCore&) = delete;
  TeleopCore& operator=(const TeleopCore&) = delete;

  /// nullopt when every environment is taken.
  std::optional<std::uint32_t> open(const std::string& session, const std::string& device, double clock_offset);
  /// Seals the open demonstration (if recording) and frees the environment.
  std::optional<DemonstrationRecord> close(const std::string& session, Outcome outcome);
  void command_dropped(const std::string& session);

  TickResult tick(const std::map<std::uint32_t, EnvInput>& inputs, double t_server);

  [[nodiscard]] simcore::EnvBatch& batch() { return batch_; }
  [[nodiscard]] const simcore::EnvBatch& batch() const { return batch_; }
  [[nodiscard]] const CoreConfig& config() const { return config_; }
  [[nodiscard]] std::uint64_t demos_sealed() const;

 private:
  struct Slot {
    std::string session;
    std::string device;
    double clock_offset = 0.0;
    std::uint64_t demos = 0;
    std::int64_t resets = 0;
    std::unique_ptr<datapipe::DemoWriter> writer;
  };

  void start_demo(std::uint32_t env, Slot& slot);
  std::optional<DemonstrationRecord> seal(Slot& slot, Outcome outcome);

  const CoreConfig config_;
  simcore::EnvBatch batch_;
  mutable std::mutex mu_;
  std::map<std::uint32_t, Slot> slots_;
  std::uint64_t sealed_ = 0;
};

}  // namespace teleop::server

#include "teleop/server/core.hpp"

#include "teleop/core/errors.hpp"

namespace teleop::server {

TeleopCore::TeleopCore(CoreConfig config)
    : config_(std::move(config)), batch_(config_.task, config_.n_envs, config_.seed, config_.tick_period) {
  if (!config_.record_dir.empty()) std::filesystem::create_directories(config_.record_dir);
}

TeleopCore::~TeleopCore() {
  std::lock_guard lock(mu_);
  for (auto& [env, slot] : slots_) seal(slot, Outcome::abandoned);
}

std::optional<std::uint32_t> TeleopCore::open(const std::string& session, const std::string& device,
                                              double clock_offset) {
  std::lock_guard lock(mu_);
  std::uint32_t env = 0;
  try {
    env = batch_.assign(session);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::BatchFull) return std::nullopt;
    throw;
  }
  Slot& slot = slots_[env];
  slot = Slot{session, device, clock_offset, 0, 0, nullptr};
  start_demo(env, slot);
  return env;
}

std::optional<DemonstrationRecord> TeleopCore::close(const std::string& session, Outcome outcome) {
  std::lock_guard lock(mu_);
  const auto env = batch_.env_of(session);
  if (!env) return std::nullopt;
  std::optional<DemonstrationRecord> rec;
  if (auto it = slots_.find(*env); it != slots_.end()) {
    rec = seal(it->second, outcome);
    slots_.erase(it);
  }
  batch_.release(session);
  return rec;
}

void TeleopCore::command_dropped(const std::string& session) {
  std::lock_guard lock(mu_);
  const auto env = batch_.env_of(session);
  if (!env) return;
  if (auto it = slots_.find(*env); it != slots_.end() && it->second.writer) it->second.writer->count_dropped();
}

std::uint64_t TeleopCore::demos_sealed() const {
  std::lock_guard lock(mu_);
  return sealed_;
}

void TeleopCore::start_demo(std::uint32_t env, Slot& slot) {
  slot.resets = 0;
  ++slot.demos;
  if (config_.record_dir.empty()) return;
  RecordHeader h;
  h.demo_id = slot.session + "." + std::to_string(slot.demos);
  h.task = std::string(simcore::task_name(config_.task.id));
  h.instance = config_.instance;
  h.session = slot.session;
  h.device = slot.device;
  h.seed = config_.seed;
  h.n_envs = static_cast<std::uint32_t>(config_.n_envs);
  h.env_index = env;
  h.episode = batch_.state(env).episode;
  h.clock_offset = slot.clock_offset;
  h.tick_period = config_.tick_period;
  slot.writer = std::make_unique<datapipe::DemoWriter>(config_.record_dir, std::move(h));
}

std::optional<DemonstrationRecord> TeleopCore::seal(Slot& slot, Outcome outcome) {
  if (!slot.writer) return std::nullopt;
  if (slot.writer->rows() == 0 && outcome != Outcome::success) {
    // A session that ends right after a success leaves an empty episode.
    slot.writer->discard();
    slot.writer.reset();
    return std::nullopt;
  }
  DemonstrationRecord rec = slot.writer->finalize(outcome, slot.resets);
  slot.writer.reset();
  ++sealed_;
  return rec;
}

TickResult TeleopCore::tick(const std::map<std::uint32_t, EnvInput>& inputs, double t_server) {
  std::lock_guard lock(mu_);
  std::map<std::uint32_t, const PoseCommand*> consumed;
  for (const auto& [env, in] : inputs) {
    auto slot = slots_.find(env);
    if (slot == slots_.end()) continue;
    if (in.reset) batch_.request_reset(env);
    for (const auto& cmd : in.commands) {
      batch_.apply_command(env, cmd);
      if (slot->second.writer) {
        slot->second.writer->add_latency({cmd.seq, cmd.t_client, cmd.t_receive, cmd.clock_offset});
      }
    }
    if (!in.commands.empty()) consumed[env] = &in.commands.back();
  }

  TickResult out;
  out.events = batch_.step(t_server);

  std::map<std::uint32_t, std::vector<Event>> by_env;
  for (const auto& e : out.events) by_env[e.env].push_back(e.event);

  for (auto& [env, slot] : slots_) {
    const simcore::EnvState s = batch_.state(env);
    out.tick = s.tick;
    TickRow row;
    row.tick = s.tick;
    row.t_server = t_server;
    if (auto c = consumed.find(env); c != consumed.end()) row.command = *c->second;
    row.effector = s.effector;
    row.gripper_closed = s.gripper_closed;
    if (auto in = inputs.find(env); in != inputs.end() && in->second.reset) {
      row.events.push_back({EventKind::reset_request, std::nullopt});
    }
    bool success = false;
    if (auto ev = by_env.find(env); ev != by_env.end()) {
      for (const auto& e : ev->second) {
        row.events.push_back(e);
        if (e.kind == EventKind::reset) ++slot.resets;
        if (e.kind == EventKind::success) success = true;
      }
    }
    if (slot.writer) slot.writer->log_tick(row);
    if (success) {
      if (auto rec = seal(slot, Outcome::success)) out.sealed.push_back(std::move(*rec));
      batch_.begin_episode(env);
      start_demo(env, slot);
    }
  }
  return out;
}

}  // namespace teleop::server

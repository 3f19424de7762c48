#include "teleop/loadharness/offline.hpp"

#include <map>

#include "teleop/server/core.hpp"

namespace teleop::loadharness {

std::vector<DemonstrationRecord> record_offline(const OfflineRun& run) {
  server::CoreConfig cfg;
  cfg.task = simcore::make_task(run.task);
  cfg.n_envs = std::max(run.n_envs, run.sessions);
  cfg.seed = run.seed;
  cfg.instance = run.instance;
  cfg.record_dir = run.dir;
  server::TeleopCore core(cfg);

  struct Operator {
    std::string session;
    std::uint32_t env = 0;
    std::unique_ptr<MotionSource> motion;
    std::uint64_t seq = 0;
    std::uint64_t done = 0;
  };
  std::vector<Operator> ops;
  for (std::size_t i = 0; i < run.sessions; ++i) {
    Operator op;
    op.session = run.instance + "-s" + std::to_string(i);
    op.env = *core.open(op.session, "scripted", 0.0);
    op.motion = make_motion(run.motion, run.task, run.seed * 7919 + i);
    ops.push_back(std::move(op));
  }

  std::vector<DemonstrationRecord> out;
  std::size_t active = ops.size();
  for (std::uint64_t k = 0; k < run.max_ticks && active > 0; ++k) {
    const double t = run.t0 + static_cast<double>(k) * cfg.tick_period;
    std::map<std::uint32_t, server::EnvInput> inputs;
    for (auto& op : ops) {
      if (op.done >= run.demos_per_session) continue;
      const Action a = op.motion->next(core.batch().snapshot(op.env));
      PoseCommand c;
      c.seq = ++op.seq;
      c.t_client = t;
      c.t_receive = t;
      c.dpos = a.dpos;
      c.drot = a.drot;
      c.gripper_closed = a.gripper_closed;
      inputs[op.env].commands.push_back(c);
    }
    server::TickResult r = core.tick(inputs, t);
    for (auto& rec : r.sealed) {
      for (auto& op : ops) {
        if (op.session == rec.header.session && ++op.done == run.demos_per_session) {
          core.close(op.session, Outcome::failure);
          --active;
        }
      }
      out.push_back(std::move(rec));
    }
  }
  for (auto& op : ops) {
    if (op.done < run.demos_per_session) {
      if (auto rec = core.close(op.session, Outcome::failure)) out.push_back(std::move(*rec));
    }
  }
  return out;
}

}  // namespace teleop::loadharness

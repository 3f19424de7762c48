#include "teleop/datapipe/replay.hpp"

#include <sstream>

namespace teleop::datapipe {

namespace {

std::string describe(const geometry::Pose& p) {
  std::ostringstream os;
  os.precision(17);
  os << '(' << p.position.x << ", " << p.position.y << ", " << p.position.z << ')';
  return os.str();
}

}  // namespace

simcore::EnvState replay(const DemonstrationRecord& rec, simcore::EnvBatch& batch) {
  const std::uint32_t env = rec.header.env_index;
  batch.assign_to(env, "replay");
  batch.begin_episode(env, rec.header.episode);
  for (const auto& row : rec.rows) {
    if (row.has_event(EventKind::reset_request)) batch.request_reset(env);
    if (row.command) batch.apply_command(env, *row.command);
    batch.step(row.t_server);
    const simcore::EnvState s = batch.state(env);
    if (!(s.effector == row.effector) || s.gripper_closed != row.gripper_closed) {
      throw DivergenceError(row.tick, "logged effector " + describe(row.effector) + " but simulator has " +
                                          describe(s.effector));
    }
  }
  return batch.state(env);
}

simcore::EnvState replay(const DemonstrationRecord& rec) {
  const auto task = simcore::task_from_name(rec.header.task);
  if (!task) throw Error(ErrorCode::CorruptRecord, "unknown task '" + rec.header.task + "'");
  simcore::EnvBatch batch(simcore::make_task(*task), rec.header.n_envs, rec.header.seed, rec.header.tick_period);
  return replay(rec, batch);
}

}  // namespace teleop::datapipe

#include "teleop/simcore/env_batch.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "teleop/core/errors.hpp"

namespace teleop::simcore {

using geometry::Pose;
using geometry::Quaternion;
using geometry::Vec3;

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double uniform(std::uint64_t& state, double lo, double hi) {
  const double u = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

Vec3 uniform_in(std::uint64_t& state, const Box& box) {
  const double x = uniform(state, box.lo.x, box.hi.x);
  const double y = uniform(state, box.lo.y, box.hi.y);
  const double z = uniform(state, box.lo.z, box.hi.z);
  return {x, y, z};
}

Quaternion random_rotation(std::uint64_t& state, double max_angle) {
  Vec3 axis;
  do {
    const double x = uniform(state, -1.0, 1.0);
    const double y = uniform(state, -1.0, 1.0);
    const double z = uniform(state, -1.0, 1.0);
    axis = {x, y, z};
  } while (geometry::norm(axis) < 1e-3 || geometry::norm(axis) > 1.0);
  const double angle = uniform(state, 0.3 * max_angle, max_angle);
  return Quaternion::from_axis_angle(axis, angle);
}

Vec3 clamp_to(const Vec3& p, const Box& box) {
  return {std::clamp(p.x, box.lo.x, box.hi.x), std::clamp(p.y, box.lo.y, box.hi.y),
          std::clamp(p.z, box.lo.z, box.hi.z)};
}

double segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = geometry::dot(ab, ab);
  double t = len2 > 0.0 ? geometry::dot(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return geometry::distance(p, a + ab * t);
}

void spawn_target(EnvState& env, const TaskParams& params) {
  Target t;
  if (params.checks_position()) {
    t.pose.position = uniform_in(env.rng_state, params.target_spawn);
  } else {
    t.pose.position = params.home_position;
  }
  if (params.checks_rotation()) {
    t.pose.orientation = random_rotation(env.rng_state, params.max_target_rotation);
  }
  t.ticks_left = params.target_lifetime_ticks;
  env.target = t;
}

void spawn_beam(EnvState& env, const TaskParams& params) {
  const std::size_t i = env.targets_done;
  BeamSegment seg;
  seg.thickness = params.beam_thickness[std::min(i, params.beam_thickness.size() - 1)];
  seg.start = uniform_in(env.rng_state, params.target_spawn);
  const double heading = uniform(env.rng_state, 0.0, 2.0 * std::numbers::pi);
  const Vec3 dir{std::cos(heading), std::sin(heading), 0.0};
  seg.end = seg.start + dir * params.beam_length;
  if (!params.target_spawn.contains(seg.end)) seg.end = seg.start - dir * params.beam_length;
  seg.end = clamp_to(seg.end, kWorkspace);
  env.beam = seg;
}

// Drops a released object onto whatever is below it.
void settle(EnvState& env, SceneObject& obj) {
  double support = kTableZ;
  for (const auto& other : env.objects) {
    if (&other == &obj || other.grasped) continue;
    const double reach = obj.half_extent + other.half_extent;
    const bool overlaps = std::abs(other.pose.position.x - obj.pose.position.x) < reach &&
                          std::abs(other.pose.position.y - obj.pose.position.y) < reach;
    const double top = other.pose.position.z + other.half_extent;
    if (overlaps && top <= obj.pose.position.z) support = std::max(support, top);
  }
  obj.pose.position.z = support + obj.half_extent;
}

void complete_target(EnvState& env, const TaskParams& params, std::vector<Event>& events) {
  ++env.targets_done;
  const std::uint32_t total = params.id == TaskId::beam_precision
                                  ? static_cast<std::uint32_t>(params.beam_thickness.size())
                                  : params.targets_per_episode;
  if (env.targets_done >= total) {
    env.target.reset();
    env.beam.reset();
    env.status = EpisodeStatus::success;
    events.push_back({EventKind::success, std::nullopt});
    return;
  }
  if (params.id == TaskId::beam_precision) {
    spawn_beam(env, params);
  } else {
    spawn_target(env, params);
  }
}

void evaluate_targets(EnvState& env, const TaskParams& params, std::vector<Event>& events) {
  if (!env.target) return;
  const Target& t = *env.target;
  const bool pos_ok = !params.checks_position() ||
                      geometry::distance(env.effector.position, t.pose.position) <= params.position_tolerance;
  const bool rot_ok = !params.checks_rotation() ||
                      geometry::relative_rotation_angle(env.effector.orientation, t.pose.orientation) <=
                          params.rotation_tolerance;
  if (pos_ok && rot_ok) {
    events.push_back({EventKind::target_hit, t.pose});
    ++env.hits;
    complete_target(env, params, events);
    return;
  }
  if (t.ticks_left > 0) {
    if (--env.target->ticks_left == 0) {
      events.push_back({EventKind::target_miss, t.pose});
      ++env.misses;
      complete_target(env, params, events);
    }
  }
}

void evaluate_beam(EnvState& env, const TaskParams& params, std::vector<Event>& events) {
  if (!env.beam) return;
  BeamSegment& seg = *env.beam;
  const Vec3& p = env.effector.position;
  if (!seg.armed) {
    if (geometry::distance(p, seg.start) <= params.position_tolerance) seg.armed = true;
    return;
  }
  if (segment_distance(p, seg.start, seg.end) > seg.thickness) {
    seg.armed = false;
    events.push_back({EventKind::beam_exit, Pose{seg.end, {}}});
    return;
  }
  if (geometry::distance(p, seg.end) <= params.position_tolerance) {
    events.push_back({EventKind::target_hit, Pose{seg.end, {}}});
    ++env.hits;
    complete_target(env, params, events);
  }
}

void evaluate_manipulation(EnvState& env, const TaskParams& params, std::vector<Event>& events) {
  if (params.id == TaskId::lift) {
    if (env.grasped_count() == 1 && env.effector.position.z > kTableZ + params.lift_height) {
      env.status = EpisodeStatus::success;
      events.push_back({EventKind::success, std::nullopt});
    }
    return;
  }
  // Stack: object 0 must rest on top of object 1, neither held.
  if (env.objects.size() < 2) return;
  const SceneObject& a = env.objects[0];
  const SceneObject& b = env.objects[1];
  if (a.grasped || b.grasped) return;
  const double lateral = std::hypot(a.pose.position.x - b.pose.position.x, a.pose.position.y - b.pose.position.y);
  const double rest_z = b.pose.position.z + b.half_extent + a.half_extent;
  if (lateral <= params.stack_lateral_tolerance && std::abs(a.pose.position.z - rest_z) <= 1e-9) {
    env.status = EpisodeStatus::success;
    events.push_back({EventKind::success, std::nullopt});
  }
}

void update_grasp(EnvState& env, const TaskParams& params, std::vector<Event>& events) {
  auto held = std::find_if(env.objects.begin(), env.objects.end(), [](const auto& o) { return o.grasped; });
  if (held != env.objects.end() && !env.gripper_closed) {
    held->grasped = false;
    env.grasp_offset.reset();
    settle(env, *held);
    events.push_back({EventKind::release, std::nullopt});
    return;
  }
  if (held == env.objects.end() && env.gripper_closed) {
    SceneObject* best = nullptr;
    double best_d = params.grasp_radius;
    for (auto& o : env.objects) {
      if (o.shape == Shape::beam_target) continue;
      const double d = geometry::distance(o.pose.position, env.effector.position);
      if (d <= best_d) {
        best_d = d;
        best = &o;
      }
    }
    if (best) {
      best->grasped = true;
      env.grasp_offset = geometry::compose(geometry::inverse(env.effector), best->pose);
      // held pose is always effector * offset, so an untouched env stays bit-identical
      best->pose = geometry::compose(env.effector, *env.grasp_offset);
      events.push_back({EventKind::grasp, std::nullopt});
    }
    return;
  }
  if (held != env.objects.end() && env.grasp_offset) {
    held->pose = geometry::compose(env.effector, *env.grasp_offset);
  }
}

}  // namespace

std::uint64_t spawn_key(std::uint64_t seed, std::uint32_t index) { return seed ^ static_cast<std::uint64_t>(index); }

void respawn(EnvState& env, const TaskParams& params, std::uint64_t key, std::uint64_t episode) {
  std::uint64_t mix = key ^ (0xD1B54A32D192ED03ULL * (episode + 1));
  env.spawn_key = key;
  env.rng_state = splitmix64(mix);

  env.episode = episode;
  env.episode_ticks = 0;
  env.status = EpisodeStatus::running;
  env.effector = Pose{params.home_position, Quaternion::identity()};
  env.gripper_closed = false;
  env.grasp_offset.reset();
  env.objects.clear();
  env.target.reset();
  env.beam.reset();
  env.targets_done = 0;
  env.hits = 0;
  env.misses = 0;
  env.pending.reset();

  const double h = params.cube_half_extent;
  switch (params.id) {
    case TaskId::lift: {
      const Vec3 p = uniform_in(env.rng_state, params.cube_spawn);
      env.objects.push_back({0, Shape::cube, Pose{{p.x, p.y, kTableZ + h}, {}}, h, false});
      break;
    }
    case TaskId::stack: {
      const Vec3 b = uniform_in(env.rng_state, params.cube_spawn);
      Vec3 a;
      do {
        a = uniform_in(env.rng_state, params.cube_spawn);
      } while (std::hypot(a.x - b.x, a.y - b.y) < 0.12);
      env.objects.push_back({0, Shape::cube, Pose{{a.x, a.y, kTableZ + h}, {}}, h, false});
      env.objects.push_back({1, Shape::cube, Pose{{b.x, b.y, kTableZ + h}, {}}, h, false});
      break;
    }
    case TaskId::beam_precision:
      spawn_beam(env, params);
      break;
    default:
      spawn_target(env, params);
      break;
  }
}

std::vector<Event> step_env(EnvState& env, const TaskParams& params) {
  std::vector<Event> events;
  if (env.status == EpisodeStatus::success) {
    env.pending.reset();
    ++env.tick;
    return events;
  }
  if (env.status == EpisodeStatus::reset_pending) {
    respawn(env, params, env.spawn_key, env.episode + 1);
    ++env.reset_count;
    events.push_back({EventKind::reset, std::nullopt});
  }

  if (env.pending) {
    const PoseCommand& cmd = *env.pending;
    env.gripper_closed = cmd.gripper_closed;
    const Vec3 dpos = geometry::clamp_norm(cmd.dpos, kMaxStepTranslation);
    Quaternion drot = Quaternion::identity();
    if (!(cmd.drot == Quaternion::identity())) {
      drot = geometry::clamp_angle(geometry::normalize(cmd.drot), kMaxStepRotation);
    }
    env.effector = geometry::compose_delta(env.effector, dpos, drot);
    env.effector.position = clamp_to(env.effector.position, kWorkspace);
    env.last_cmd_seq = cmd.seq;
    env.pending.reset();
  }

  update_grasp(env, params, events);
  ++env.episode_ticks;

  if (params.id == TaskId::beam_precision) {
    evaluate_beam(env, params, events);
  } else if (params.is_curriculum()) {
    evaluate_targets(env, params, events);
  } else {
    evaluate_manipulation(env, params, events);
  }

  if (env.status == EpisodeStatus::running && params.episode_time_limit_ticks > 0 &&
      env.episode_ticks >= params.episode_time_limit_ticks) {
    env.status = EpisodeStatus::reset_pending;
    events.push_back({EventKind::timeout, std::nullopt});
  }
  ++env.tick;
  return events;
}

FrameSnapshot make_snapshot(const EnvState& env, const TaskParams& params, std::uint32_t index,
                            double t_server) {
  FrameSnapshot s;
  s.env_index = index;
  s.tick = env.tick;
  s.t_server = t_server;
  s.task = params.id;
  s.status = env.status;
  s.episode = env.episode;
  s.last_cmd_seq = env.last_cmd_seq;
  s.effector = env.effector;
  s.gripper_closed = env.gripper_closed;
  s.objects = env.objects;
  if (env.target) {
    s.target = TargetOverlay{env.target->pose, params.position_tolerance, params.rotation_tolerance,
                             env.target->ticks_left};
  }
  s.beam = env.beam;
  s.targets_done = env.targets_done;
  if (params.id == TaskId::beam_precision) {
    s.targets_total = static_cast<std::uint32_t>(params.beam_thickness.size());
  } else if (params.is_curriculum()) {
    s.targets_total = params.targets_per_episode;
  }
  s.hits = env.hits;
  s.misses = env.misses;
  s.reset_count = env.reset_count;
  return s;
}

// --- EnvBatch ---------------------------------------------------------------

EnvBatch::EnvBatch(TaskParams task, std::size_t n, std::uint64_t seed, double tick_period)
    : task_(std::move(task)), seed_(seed), tick_period_(tick_period) {
  if (n < 1 || n > kMaxBatchSize) {
    throw Error(ErrorCode::InvalidCount, "batch size " + std::to_string(n) + " outside [1, 64]");
  }
  validate(task_);
  envs_.resize(n);
  assignment_.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) respawn(envs_[i], task_, spawn_key(seed_, i), 0);
}

void EnvBatch::check_index(std::uint32_t index) const {
  if (index >= envs_.size()) {
    throw std::out_of_range("env index " + std::to_string(index) + " out of range");
  }
}

std::uint32_t EnvBatch::assign(const std::string& session) {
  std::lock_guard lock(mu_);
  if (by_session_.contains(session)) {
    throw std::invalid_argument("session " + session + " already assigned");
  }
  for (std::uint32_t i = 0; i < envs_.size(); ++i) {
    if (!assignment_[i]) {
      assignment_[i] = session;
      by_session_[session] = i;
      respawn(envs_[i], task_, spawn_key(seed_, i), envs_[i].episode + 1);
      return i;
    }
  }
  throw Error(ErrorCode::BatchFull, "all " + std::to_string(envs_.size()) + " environments are assigned");
}

void EnvBatch::assign_to(std::uint32_t index, const std::string& session) {
  std::lock_guard lock(mu_);
  check_index(index);
  if (assignment_[index] || by_session_.contains(session)) {
    throw Error(ErrorCode::BatchFull, "environment " + std::to_string(index) + " is assigned");
  }
  assignment_[index] = session;
  by_session_[session] = index;
}

void EnvBatch::release(const std::string& session) {
  std::lock_guard lock(mu_);
  auto it = by_session_.find(session);
  if (it == by_session_.end()) throw Error(ErrorCode::UnknownSession, "no environment for session " + session);
  assignment_[it->second].reset();
  envs_[it->second].pending.reset();
  envs_[it->second].last_cmd_seq = 0;  // the next session numbers its commands from 1
  by_session_.erase(it);
}

std::optional<std::uint32_t> EnvBatch::env_of(const std::string& session) const {
  std::lock_guard lock(mu_);
  auto it = by_session_.find(session);
  if (it == by_session_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> EnvBatch::session_of(std::uint32_t index) const {
  std::lock_guard lock(mu_);
  check_index(index);
  return assignment_[index];
}

std::vector<std::uint32_t> EnvBatch::assigned_envs() const {
  std::lock_guard lock(mu_);
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 0; i < envs_.size(); ++i) {
    if (assignment_[i]) out.push_back(i);
  }
  return out;
}

std::size_t EnvBatch::assigned_count() const {
  std::lock_guard lock(mu_);
  return by_session_.size();
}

void EnvBatch::apply_command(std::uint32_t index, const PoseCommand& cmd) {
  const auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(cmd.dpos.x) || !finite(cmd.dpos.y) || !finite(cmd.dpos.z) || !finite(cmd.drot.w) ||
      !finite(cmd.drot.x) || !finite(cmd.drot.y) || !finite(cmd.drot.z)) {
    throw std::invalid_argument("command deltas must be finite");
  }
  std::lock_guard lock(mu_);
  check_index(index);
  if (!assignment_[index]) throw Error(ErrorCode::Unassigned, "environment " + std::to_string(index) + " is free");
  envs_[index].pending = cmd;
}

void EnvBatch::request_reset(std::uint32_t index) {
  std::lock_guard lock(mu_);
  check_index(index);
  envs_[index].status = EpisodeStatus::reset_pending;
}

void EnvBatch::begin_episode(std::uint32_t index, std::optional<std::uint64_t> episode) {
  std::lock_guard lock(mu_);
  check_index(index);
  EnvState& env = envs_[index];
  respawn(env, task_, spawn_key(seed_, index), episode.value_or(env.episode + 1));
}

std::vector<IndexedEvent> EnvBatch::step(std::optional<double> t_server) {
  std::lock_guard lock(mu_);
  std::vector<IndexedEvent> out;
  for (std::uint32_t i = 0; i < envs_.size(); ++i) {
    for (auto& e : step_env(envs_[i], task_)) out.push_back({i, std::move(e)});
  }
  ++steps_;
  last_step_time_ = t_server.value_or(static_cast<double>(steps_) * tick_period_);
  return out;
}

FrameSnapshot EnvBatch::snapshot(std::uint32_t index) const {
  std::lock_guard lock(mu_);
  check_index(index);
  return make_snapshot(envs_[index], task_, index, last_step_time_);
}

EnvState EnvBatch::state(std::uint32_t index) const {
  std::lock_guard lock(mu_);
  check_index(index);
  return envs_[index];
}

std::uint64_t EnvBatch::steps() const {
  std::lock_guard lock(mu_);
  return steps_;
}

}  // namespace teleop::simcore

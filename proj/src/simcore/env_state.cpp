#include "teleop/simcore/env_state.hpp"

namespace teleop::simcore {

namespace {

void put_pose(ByteWriter& w, const geometry::Pose& p) {
  w.f64(p.position.x);
  w.f64(p.position.y);
  w.f64(p.position.z);
  w.f64(p.orientation.w);
  w.f64(p.orientation.x);
  w.f64(p.orientation.y);
  w.f64(p.orientation.z);
}

}  // namespace

Bytes serialize_state(const EnvState& s) {
  Bytes out;
  out.reserve(256);
  ByteWriter w(out);
  put_pose(w, s.effector);
  w.u8(s.gripper_closed);
  w.u32(static_cast<std::uint32_t>(s.objects.size()));
  for (const auto& o : s.objects) {
    w.u8(o.id);
    w.u8(static_cast<std::uint8_t>(o.shape));
    put_pose(w, o.pose);
    w.f64(o.half_extent);
    w.u8(o.grasped);
  }
  w.u8(s.grasp_offset.has_value());
  if (s.grasp_offset) put_pose(w, *s.grasp_offset);
  w.u8(s.target.has_value());
  if (s.target) {
    put_pose(w, s.target->pose);
    w.u32(s.target->ticks_left);
  }
  w.u8(s.beam.has_value());
  if (s.beam) {
    w.f64(s.beam->start.x);
    w.f64(s.beam->start.y);
    w.f64(s.beam->start.z);
    w.f64(s.beam->end.x);
    w.f64(s.beam->end.y);
    w.f64(s.beam->end.z);
    w.f64(s.beam->thickness);
    w.u8(s.beam->armed);
  }
  w.u32(s.targets_done);
  w.u32(s.hits);
  w.u32(s.misses);
  w.u64(s.tick);
  w.u64(s.episode);
  w.u64(s.episode_ticks);
  w.u8(static_cast<std::uint8_t>(s.status));
  w.u64(static_cast<std::uint64_t>(s.reset_count));
  w.u64(s.spawn_key);
  w.u64(s.rng_state);
  w.u8(s.pending.has_value());
  if (s.pending) w.raw(encode_pose_command(*s.pending));
  w.u64(s.last_cmd_seq);
  return out;
}

std::uint64_t hash_state(const EnvState& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : serialize_state(s)) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t hash_world(const EnvState& s) {
  EnvState copy = s;
  copy.tick = 0;
  copy.episode_ticks = 0;
  return hash_state(copy);
}

}  // namespace teleop::simcore

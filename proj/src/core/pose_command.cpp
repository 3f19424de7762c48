#include "teleop/core/pose_command.hpp"

namespace teleop {

Bytes encode_pose_command(const PoseCommand& cmd) {
  Bytes out;
  out.reserve(97);
  ByteWriter w(out);
  w.u64(cmd.seq);
  w.f64(cmd.t_client);
  w.f64(cmd.t_receive);
  w.f64(cmd.clock_offset);
  w.f64(cmd.dpos.x);
  w.f64(cmd.dpos.y);
  w.f64(cmd.dpos.z);
  w.f64(cmd.drot.w);
  w.f64(cmd.drot.x);
  w.f64(cmd.drot.y);
  w.f64(cmd.drot.z);
  w.u8(cmd.gripper_closed ? 1 : 0);
  return out;
}

PoseCommand decode_pose_command(ByteView bytes) {
  ByteReader r(bytes);
  PoseCommand cmd;
  cmd.seq = r.u64();
  cmd.t_client = r.f64();
  cmd.t_receive = r.f64();
  cmd.clock_offset = r.f64();
  cmd.dpos = {r.f64(), r.f64(), r.f64()};
  cmd.drot.w = r.f64();
  cmd.drot.x = r.f64();
  cmd.drot.y = r.f64();
  cmd.drot.z = r.f64();
  cmd.gripper_closed = r.u8() != 0;
  return cmd;
}

}  // namespace teleop

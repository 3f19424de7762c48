#include "teleop/loadharness/client.hpp"

#include <thread>

#include "teleop/core/errors.hpp"
#include "teleop/media/codec.hpp"

namespace teleop::loadharness {

namespace {

using Clock = std::chrono::steady_clock;

protocol::Pose to_pose(const Action& a) {
  protocol::Pose p;
  p.dpos = {a.dpos.x, a.dpos.y, a.dpos.z};
  p.drot = {a.drot.w, a.drot.x, a.drot.y, a.drot.z};
  p.gripper = a.gripper_closed;
  return p;
}

}  // namespace

ClientResult run_client(const ClientConfig& cfg) {
  ClientResult out;
  session::ClientOptions opts = cfg.options;
  if (!cfg.link.loopback()) {
    const LinkParams link = cfg.link;
    const std::uint64_t seed = cfg.seed;
    opts.wrap = [link, seed](std::unique_ptr<net::Connection> c) -> std::unique_ptr<net::Connection> {
      return std::make_unique<LinkShim>(std::move(c), link, seed);
    };
  }

  std::unique_ptr<session::SessionClient> client;
  try {
    client = session::SessionClient::connect(cfg.target, opts);
  } catch (const Error& e) {
    out.error = e.what();
    return out;
  }
  out.connected = true;
  const protocol::Welcome& w = client->welcome();
  out.session = w.session;
  out.instance = w.instance;
  out.env = w.env;
  out.clock_offset_ms = w.clock_offset;

  const auto task = simcore::task_from_name(w.task).value_or(simcore::TaskId::lift);
  MotionKind kind = cfg.motion;
  if (kind == MotionKind::scripted && !ScriptedSolver::supports(task)) kind = MotionKind::random_walk;
  auto motion = make_motion(kind, task, cfg.seed);

  std::optional<simcore::FrameSnapshot> scene;
  std::uint64_t last_planned = 0;
  std::uint64_t last_reflected = 0;
  bool gripper = false;
  std::vector<double> sent_at(1, 0.0);  // client ms, indexed by seq

  const auto period = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(1.0 / cfg.send_hz));
  // Lock the send schedule to the frame stream so command-to-frame latency
  // does not depend on where the client happened to start within a tick.
  auto start = Clock::now();
  try {
    const auto give_up = start + std::chrono::seconds(1);
    while (Clock::now() < give_up) {
      auto ev = client->receive(std::chrono::milliseconds(100));
      if (ev && std::holds_alternative<session::FrameMessage>(*ev)) break;
    }
  } catch (const Error& e) {
    out.error = e.what();
    return out;
  }
  start = Clock::now() + cfg.send_phase;
  const auto end = start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(cfg.duration));
  auto next_send = start;
  auto next_ping = start + cfg.ping_period;

  try {
    while (Clock::now() < end && !(cfg.stop && cfg.stop->load())) {
      const auto now = Clock::now();
      if (now < start) {
        std::this_thread::sleep_until(start);
        continue;
      }
      if (now >= next_send) {
        protocol::Pose pose;
        const bool plan = scene && last_reflected >= last_planned;
        if (plan) {
          const Action a = motion->next(*scene);
          gripper = a.gripper_closed;
          pose = to_pose(a);
          ++out.planned;
        } else {
          pose.gripper = gripper;
        }
        const double t = client->now_ms();
        const std::uint64_t seq = client->send_pose(pose);
        if (plan) last_planned = seq;
        if (sent_at.size() <= seq) sent_at.resize(seq + 1, 0.0);
        sent_at[seq] = t;
        ++out.poses_sent;
        next_send += period;
      }
      if (now >= next_ping) {
        client->send_ping();
        next_ping += cfg.ping_period;
      }
      const auto wait = std::chrono::duration_cast<std::chrono::milliseconds>(std::min(next_send, next_ping) - Clock::now());
      auto ev = client->receive(std::max(wait, std::chrono::milliseconds(0)));
      if (!ev) continue;
      if (auto* f = std::get_if<session::FrameMessage>(&*ev)) {
        ++out.frames;
        const media::FrameInfo info = media::inspect(f->data);
        // The first frame of a session can still show the previous session's
        // sequence numbers; those are higher than anything this client sent.
        if (info.last_cmd_seq > last_reflected && info.last_cmd_seq < sent_at.size()) {
          if (sent_at[info.last_cmd_seq] > 0) out.frame_latency_ms.push_back(f->t_receive - sent_at[info.last_cmd_seq]);
          last_reflected = info.last_cmd_seq;
        }
        if (info.encoding == media::Encoding::state_v1) {
          scene = media::decode_state(media::from_wire(f->data).payload);
        } else if (!scene) {
          scene = simcore::FrameSnapshot{};
          scene->task = task;
          scene->effector.position = simcore::make_task(task).home_position;
        }
        continue;
      }
      const auto& m = std::get<protocol::ServerMessage>(*ev);
      if (const auto* ack = std::get_if<protocol::Ack>(&m)) {
        ++out.acks;
        if (ack->seq < sent_at.size()) out.ack_latency_ms.push_back(ack->t_server - (sent_at[ack->seq] + out.clock_offset_ms));
      } else if (const auto* e = std::get_if<protocol::EventNotice>(&m)) {
        if (e->kind == "success") ++out.successes;
        if (e->kind == "expired") throw Error(ErrorCode::SessionExpired, "session expired");
      } else if (const auto* err = std::get_if<protocol::Err>(&m)) {
        session::raise(*err);
      }
    }
    out.elapsed = std::chrono::duration<double>(Clock::now() - start).count();
    client->send_bye();
    client->close();
    out.clean_exit = true;
  } catch (const Error& e) {
    out.elapsed = std::chrono::duration<double>(Clock::now() - start).count();
    out.error = e.what();
  }
  return out;
}

}  // namespace teleop::loadharness

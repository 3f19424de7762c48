#include "teleop/session/registry.hpp"

#include <stdexcept>

#include "teleop/core/clock.hpp"

namespace teleop::session {

bool accept_sequence(Session& s, std::uint64_t seq) {
  if (s.command_seq_high && seq <= *s.command_seq_high) {
    ++s.dropped;
    return false;
  }
  s.command_seq_high = seq;
  ++s.accepted;
  return true;
}

PoseCommand to_command(const protocol::Pose& p, double t_receive, double clock_offset) {
  PoseCommand c;
  c.seq = p.seq;
  c.t_client = ms_to_seconds(p.t_client);
  c.t_receive = t_receive;
  c.clock_offset = clock_offset;
  c.dpos = {p.dpos[0], p.dpos[1], p.dpos[2]};
  c.drot = {p.drot[0], p.drot[1], p.drot[2], p.drot[3]};
  c.gripper_closed = p.gripper;
  return c;
}

void SessionRegistry::add(Session s) {
  std::lock_guard lock(mu_);
  const std::string id = s.id;
  if (!sessions_.emplace(id, std::move(s)).second) throw std::logic_error("duplicate session id " + id);
}

bool SessionRegistry::remove(const std::string& id) {
  std::lock_guard lock(mu_);
  return sessions_.erase(id) > 0;
}

void SessionRegistry::touch(const std::string& id, double now) {
  std::lock_guard lock(mu_);
  if (auto it = sessions_.find(id); it != sessions_.end()) it->second.last_seen = now;
}

void SessionRegistry::set_clock_offset(const std::string& id, double offset) {
  std::lock_guard lock(mu_);
  if (auto it = sessions_.find(id); it != sessions_.end()) it->second.clock_offset = offset;
}

bool SessionRegistry::accept(const std::string& id, std::uint64_t seq, double now) {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) return false;
  it->second.last_seen = now;
  return accept_sequence(it->second, seq);
}

std::vector<std::string> SessionRegistry::expire(double now, double idle) {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    if (now - it->second.last_seen > idle) {
      out.push_back(it->first);
      it = sessions_.erase(it);
    } else {
      ++it;
    }
  }
  return out;
}

std::optional<Session> SessionRegistry::get(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) return std::nullopt;
  return it->second;
}

std::vector<Session> SessionRegistry::list() const {
  std::lock_guard lock(mu_);
  std::vector<Session> out;
  for (const auto& [id, s] : sessions_) out.push_back(s);
  return out;
}

std::size_t SessionRegistry::size() const {
  std::lock_guard lock(mu_);
  return sessions_.size();
}

}  // namespace teleop::session

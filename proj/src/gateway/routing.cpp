#include "teleop/gateway/routing.hpp"

#include <algorithm>

#include "teleop/core/errors.hpp"

namespace teleop::gateway {

void RoutingTable::register_instance(const InstanceRecord& rec, double now) {
  std::lock_guard lock(mu_);
  InstanceRecord r = rec;
  if (auto it = instances_.find(rec.id); it != instances_.end()) r.reserved = it->second.reserved;
  r.last_heartbeat = now;
  instances_[r.id] = r;
}

void RoutingTable::heartbeat(const std::string& id, std::uint32_t live, double now) {
  std::lock_guard lock(mu_);
  auto it = instances_.find(id);
  if (it == instances_.end()) throw Error(ErrorCode::UnknownInstance, "instance '" + id + "' is not registered");
  it->second.live = live;
  it->second.last_heartbeat = now;
}

InstanceRecord RoutingTable::route(const std::string& task, double now) {
  std::lock_guard lock(mu_);
  InstanceRecord* best = nullptr;
  // std::map iterates in id order, so the first minimum found is the lowest id.
  for (auto& [id, r] : instances_) {
    if (!task.empty() && r.task != task) continue;
    if (!fresh(r, now) || r.load() >= r.capacity) continue;
    if (!best || r.load() < best->load()) best = &r;
  }
  if (!best) {
    throw Error(ErrorCode::NoInstance, "no routable instance for task '" + (task.empty() ? "*" : task) + "'");
  }
  ++best->reserved;
  ++routed_;
  return *best;
}

void RoutingTable::release(const std::string& id) {
  std::lock_guard lock(mu_);
  auto it = instances_.find(id);
  if (it == instances_.end()) throw Error(ErrorCode::UnknownInstance, "instance '" + id + "' is not registered");
  if (it->second.reserved > 0) {
    --it->second.reserved;
    ++released_;
  }
}

bool RoutingTable::serves(const std::string& task, double now) const {
  std::lock_guard lock(mu_);
  return std::any_of(instances_.begin(), instances_.end(), [&](const auto& kv) {
    return (task.empty() || kv.second.task == task) && fresh(kv.second, now);
  });
}

std::vector<InstanceRecord> RoutingTable::instances() const {
  std::lock_guard lock(mu_);
  std::vector<InstanceRecord> out;
  for (const auto& [id, r] : instances_) out.push_back(r);
  return out;
}

std::uint64_t RoutingTable::routed() const {
  std::lock_guard lock(mu_);
  return routed_;
}

std::uint64_t RoutingTable::released() const {
  std::lock_guard lock(mu_);
  return released_;
}

bool RateLimiter::allow(const std::string& address, double now) {
  std::lock_guard lock(mu_);
  auto [it, inserted] = buckets_.try_emplace(address, Bucket{params_.burst, now});
  Bucket& b = it->second;
  if (!inserted) {
    b.tokens = std::min(params_.burst, b.tokens + (now - b.updated) * params_.refill_per_second);
    b.updated = now;
  }
  if (b.tokens < 1.0) return false;
  b.tokens -= 1.0;
  return true;
}

}  // namespace teleop::gateway

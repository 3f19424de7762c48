#include "teleop/server/cluster.hpp"

#include <thread>

namespace teleop::server {

LocalCluster::LocalCluster(const ClusterConfig& config) {
  gateway::GatewayConfig g;
  g.listen = {config.host, 0};
  gateway_ = std::make_unique<gateway::GatewayServer>(g);
  for (std::size_t i = 0; i < config.instances; ++i) {
    InstanceConfig c;
    c.core.task = simcore::make_task(config.task);
    c.core.n_envs = config.capacity;
    c.core.seed = config.seed + i;
    c.core.record_dir = config.record_dir;
    c.session.listen = {config.host, 0};
    c.session.instance = "i" + std::to_string(i);
    c.encoding = config.encoding;
    c.gateway = gateway_->endpoint();
    c.heartbeat = config.heartbeat;
    instances_.push_back(std::make_unique<TeleopInstance>(std::move(c)));
  }
}

LocalCluster::~LocalCluster() { stop(); }

void LocalCluster::stop() {
  for (auto& i : instances_) i->stop();
  if (gateway_) gateway_->stop();
}

bool LocalCluster::wait_ready(std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (std::chrono::steady_clock::now() < deadline) {
    if (gateway_->table().instances().size() == instances_.size()) return true;
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  return false;
}

std::vector<net::Endpoint> LocalCluster::instance_endpoints() const {
  std::vector<net::Endpoint> out;
  for (const auto& i : instances_) out.push_back(i->endpoint());
  return out;
}

}  // namespace teleop::server

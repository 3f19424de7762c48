#pragma once

#include <memory>
#include <vector>

#include "teleop/gateway/server.hpp"
#include "teleop/server/instance.hpp"

namespace teleop::server {

struct ClusterConfig {
  std::size_t instances = 2;
  std::size_t capacity = 4;
  simcore::TaskId task = simcore::TaskId::lift;
  std::uint64_t seed = 1;
  std::filesystem::path record_dir;
  media::Encoding encoding = media::Encoding::state_v1;
  std::string host = "127.0.0.1";
  std::chrono::milliseconds heartbeat{500};
};

/// A gateway plus a fixed set of instances, all in this process.
class LocalCluster {
 public:
  explicit LocalCluster(const ClusterConfig& config);
  ~LocalCluster();

  void stop();

  /// Blocks until every instance registered with the gateway; false on timeout.
  bool wait_ready(std::chrono::milliseconds timeout = std::chrono::milliseconds(5000));

  [[nodiscard]] net::Endpoint gateway_endpoint() const { return gateway_->endpoint(); }
  [[nodiscard]] std::vector<net::Endpoint> instance_endpoints() const;
  [[nodiscard]] gateway::GatewayServer& gateway() { return *gateway_; }
  [[nodiscard]] TeleopInstance& instance(std::size_t i) { return *instances_.at(i); }
  [[nodiscard]] std::size_t size() const { return instances_.size(); }

 private:
  std::unique_ptr<gateway::GatewayServer> gateway_;
  std::vector<std::unique_ptr<TeleopInstance>> instances_;
};

}  // namespace teleop::server

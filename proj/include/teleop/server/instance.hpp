#pragma once

#include <memory>
#include <optional>

#include "teleop/gateway/server.hpp"
#include "teleop/server/service.hpp"
#include "teleop/session/server.hpp"

namespace teleop::server {

struct InstanceConfig {
  CoreConfig core;
  session::SessionServerConfig session;
  media::Encoding encoding = media::Encoding::state_v1;
  /// Registers with this gateway when set.
  std::optional<net::Endpoint> gateway;
  std::chrono::milliseconds heartbeat{1000};
};

/// One complete teleop instance: store, tick service, session endpoint and
/// an optional gateway registration.
class TeleopInstance {
 public:
  explicit TeleopInstance(InstanceConfig config);
  ~TeleopInstance();

  TeleopInstance(const TeleopInstance&) = delete;
  TeleopInstance& operator=(const TeleopInstance&) = delete;

  void stop();

  [[nodiscard]] net::Endpoint endpoint() const { return sessions_->endpoint(); }
  [[nodiscard]] const std::string& id() const { return id_; }
  [[nodiscard]] TeleopService& service() { return *service_; }
  [[nodiscard]] session::SessionServer& sessions() { return *sessions_; }
  [[nodiscard]] statestore::StateStore& store() { return store_; }
  [[nodiscard]] gateway::GatewayLink* link() { return link_.get(); }

 private:
  std::string id_;
  statestore::StateStore store_;
  std::unique_ptr<TeleopService> service_;
  std::unique_ptr<session::SessionServer> sessions_;
  std::unique_ptr<gateway::GatewayLink> link_;
};

}  // namespace teleop::server

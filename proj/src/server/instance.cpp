#include "teleop/server/instance.hpp"

namespace teleop::server {

TeleopInstance::TeleopInstance(InstanceConfig config) : id_(config.session.instance) {
  config.core.instance = id_;
  service_ = std::make_unique<TeleopService>(config.core, store_, config.encoding);
  config.session.on_session_start = [this](const std::string&) {
    if (link_) link_->poke();
  };
  config.session.on_session_end = [this](const std::string&, Outcome) {
    if (link_) link_->release();
  };
  sessions_ = std::make_unique<session::SessionServer>(config.session, *service_, store_);
  if (config.gateway) {
    protocol::Register reg{id_, sessions_->endpoint().str(), service_->task_name(),
                           static_cast<std::uint32_t>(service_->capacity()), 0};
    link_ = std::make_unique<gateway::GatewayLink>(
        *config.gateway, reg, [this] { return static_cast<std::uint32_t>(sessions_->live_sessions()); },
        config.heartbeat);
  }
}

TeleopInstance::~TeleopInstance() { stop(); }

void TeleopInstance::stop() {
  if (sessions_) sessions_->stop();
  if (link_) link_->stop();
  if (service_) service_->stop();
}

}  // namespace teleop::server

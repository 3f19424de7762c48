#include "teleop/net/server.hpp"

namespace teleop::net {

ConnectionServer::ConnectionServer(const Endpoint& at, Handler handler, std::chrono::milliseconds detect_timeout)
    : handler_(std::move(handler)), detect_timeout_(detect_timeout), listener_(at) {
  acceptor_ = std::thread([this] { accept_loop(); });
}

ConnectionServer::~ConnectionServer() { stop(); }

void ConnectionServer::accept_loop() {
  while (!stopping_.load()) {
    std::optional<Socket> sock;
    try {
      sock = listener_.accept(std::chrono::milliseconds(100));
    } catch (const Error&) {
      if (stopping_.load()) break;
      continue;
    }
    reap();
    if (!sock) continue;
    std::lock_guard lock(mu_);
    if (stopping_.load()) break;
    const std::uint64_t id = next_id_++;
    auto owned = std::make_shared<Socket>(std::move(*sock));
    threads_.emplace(id, std::thread([this, id, owned] {
      try {
        std::shared_ptr<Connection> conn = accept_connection(std::move(*owned), detect_timeout_);
        {
          std::lock_guard inner(mu_);
          if (stopping_.load()) conn->close();
          connections_.emplace(id, conn);
        }
        handler_(conn);
        conn->close();
      } catch (const Error&) {
        // Failed framing detection or a handler that gave up on its peer.
      }
      std::lock_guard inner(mu_);
      connections_.erase(id);
      finished_.push_back(id);
    }));
  }
}

void ConnectionServer::reap() {
  std::vector<std::thread> done;
  {
    std::lock_guard lock(mu_);
    for (const auto id : finished_) {
      auto it = threads_.find(id);
      if (it != threads_.end()) {
        done.push_back(std::move(it->second));
        threads_.erase(it);
      }
    }
    finished_.clear();
  }
  for (auto& t : done) t.join();
}

void ConnectionServer::stop() {
  if (stopping_.exchange(true)) {
    if (acceptor_.joinable()) acceptor_.join();
    return;
  }
  listener_.close();
  if (acceptor_.joinable()) acceptor_.join();
  std::map<std::uint64_t, std::thread> threads;
  {
    std::lock_guard lock(mu_);
    for (auto& [id, c] : connections_) c->close();
    threads.swap(threads_);
  }
  for (auto& [id, t] : threads) t.join();
}

std::size_t ConnectionServer::active() const {
  std::lock_guard lock(mu_);
  return connections_.size();
}

}  // namespace teleop::net

#include "teleop/loadharness/link.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "teleop/core/errors.hpp"

namespace teleop::loadharness {

namespace {

bool is_pose(std::string_view text) { return text.find("\"type\":\"pose\"") != std::string_view::npos; }

}  // namespace

LinkParams parse_link(const std::string& text) {
  if (text == "loopback") return {};
  if (text.rfind("wan:", 0) != 0) throw std::invalid_argument("link must be 'loopback' or 'wan:<ms>[:<sigma>[:<loss>]]'");
  LinkParams p;
  std::istringstream in(text.substr(4));
  std::string part;
  double* fields[] = {&p.delay_ms, &p.sigma_ms, &p.loss};
  for (double* f : fields) {
    if (!std::getline(in, part, ':')) break;
    *f = std::stod(part);
  }
  if (p.delay_ms < 0 || p.sigma_ms < 0 || p.loss < 0 || p.loss >= 1) throw std::invalid_argument("bad link parameters");
  return p;
}

std::string describe(const LinkParams& p) {
  if (p.loopback()) return "loopback";
  std::ostringstream os;
  os << "wan:" << p.delay_ms << ':' << p.sigma_ms << ':' << p.loss;
  return os.str();
}

LinkShim::LinkShim(std::unique_ptr<net::Connection> inner, LinkParams params, std::uint64_t seed)
    : inner_(std::move(inner)), params_(params), rng_(seed) {
  out_thread_ = std::thread([this] { pump_out(); });
  in_thread_ = std::thread([this] { pump_in(); });
}

LinkShim::~LinkShim() {
  close();
  if (out_thread_.joinable()) out_thread_.join();
  if (in_thread_.joinable()) in_thread_.join();
}

LinkShim::Clock::time_point LinkShim::release_time(Clock::time_point& last) {
  std::normal_distribution<double> d(params_.delay_ms, params_.sigma_ms);
  const double ms = params_.sigma_ms > 0 ? std::max(0.0, d(rng_)) : params_.delay_ms;
  const auto at = Clock::now() + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double, std::milli>(ms));
  last = std::max(last, at);
  return last;
}

void LinkShim::send_text(std::string_view text) {
  std::lock_guard lock(mu_);
  if (closed_) throw Error(ErrorCode::ConnectionClosed, "link closed");
  if (params_.loss > 0 && is_pose(text) && std::uniform_real_distribution<double>(0, 1)(rng_) < params_.loss) {
    ++lost_;
    return;
  }
  out_.push_back({release_time(last_out_), {net::MessageKind::text, to_bytes(text)}});
  out_cv_.notify_one();
}

void LinkShim::send_binary(ByteView data) {
  std::lock_guard lock(mu_);
  if (closed_) throw Error(ErrorCode::ConnectionClosed, "link closed");
  out_.push_back({release_time(last_out_), {net::MessageKind::binary, Bytes(data.begin(), data.end())}});
  out_cv_.notify_one();
}

void LinkShim::pump_out() {
  std::unique_lock lock(mu_);
  while (!closed_) {
    if (out_.empty()) {
      out_cv_.wait(lock);
      continue;
    }
    if (Clock::now() < out_.front().release) {
      out_cv_.wait_until(lock, out_.front().release);
      continue;
    }
    Held h = std::move(out_.front());
    out_.pop_front();
    const bool drained = out_.empty();
    lock.unlock();
    try {
      if (h.message.kind == net::MessageKind::text) {
        inner_->send_text(h.message.text());
      } else {
        inner_->send_binary(h.message.data);
      }
    } catch (const Error&) {
      lock.lock();
      closed_ = true;
      in_cv_.notify_all();
      drained_cv_.notify_all();
      return;
    }
    lock.lock();
    if (drained) drained_cv_.notify_all();
  }
}

void LinkShim::pump_in() {
  for (;;) {
    {
      std::lock_guard lock(mu_);
      if (closed_) return;
    }
    std::optional<net::Incoming> m;
    bool eof = false;
    try {
      m = inner_->receive(std::chrono::milliseconds(100));
    } catch (const Error&) {
      eof = true;
    }
    if (!m && !eof) continue;
    std::lock_guard lock(mu_);
    in_.push_back({release_time(last_in_), m ? std::move(*m) : net::Incoming{}, eof});
    in_cv_.notify_all();
    if (eof) return;
  }
}

std::optional<net::Incoming> LinkShim::receive(std::chrono::milliseconds timeout) {
  const auto deadline = Clock::now() + timeout;
  std::unique_lock lock(mu_);
  for (;;) {
    if (!in_.empty() && Clock::now() >= in_.front().release) {
      Held h = std::move(in_.front());
      in_.pop_front();
      if (h.eof) {
        closed_ = true;
        throw Error(ErrorCode::ConnectionClosed, "peer closed");
      }
      return std::move(h.message);
    }
    if (closed_ && in_.empty()) throw Error(ErrorCode::ConnectionClosed, "link closed");
    const auto now = Clock::now();
    if (now >= deadline) return std::nullopt;
    auto until = deadline;
    if (!in_.empty()) until = std::min(until, in_.front().release);
    in_cv_.wait_until(lock, until);
  }
}

void LinkShim::close() {
  {
    std::unique_lock lock(mu_);
    // Let queued outbound messages (a final bye) reach the wire first.
    drained_cv_.wait_for(lock, std::chrono::seconds(2), [&] { return closed_ || out_.empty(); });
    closed_ = true;
    out_cv_.notify_all();
    in_cv_.notify_all();
  }
  inner_->close();
}

bool LinkShim::closed() const {
  std::lock_guard lock(mu_);
  return closed_;
}

std::uint64_t LinkShim::lost() const {
  std::lock_guard lock(mu_);
  return lost_;
}

}  // namespace teleop::loadharness

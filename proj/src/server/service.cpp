#include "teleop/server/service.hpp"

#include <vector>

#include "teleop/core/clock.hpp"
#include "teleop/core/stats.hpp"
#include "teleop/media/pipeline.hpp"

namespace teleop::server {

namespace {

constexpr std::size_t kStatsWindow = 12000;  // ticks, ten minutes at 20 Hz

bool forwarded(EventKind k) { return k == EventKind::success || k == EventKind::reset || k == EventKind::timeout; }

void push_bounded(std::deque<double>& q, double v) {
  q.push_back(v);
  if (q.size() > kStatsWindow) q.pop_front();
}

double ms(double s) { return seconds_to_ms(s); }

}  // namespace

TeleopService::TeleopService(CoreConfig config, statestore::StateStore& store, media::Encoding encoding)
    : core_(std::move(config)), store_(store), encoding_(encoding) {
  driver_ = std::thread([this] { run(); });
}

TeleopService::~TeleopService() { stop(); }

void TeleopService::stop() {
  stop_ = true;
  if (driver_.joinable()) driver_.join();
}

std::optional<std::uint32_t> TeleopService::open_session(const session::SessionInfo& info) {
  std::lock_guard lock(feeds_mu_);
  auto env = core_.open(info.id, info.device, info.clock_offset);
  if (!env) return std::nullopt;
  feeds_[info.id] = Feed{*env, store_.subscribe(statestore::command_channel(info.id)),
                         store_.subscribe(statestore::control_channel(info.id))};
  return env;
}

void TeleopService::close_session(const std::string& id, Outcome outcome) {
  {
    std::lock_guard lock(feeds_mu_);
    feeds_.erase(id);
  }
  core_.close(id, outcome);
}

void TeleopService::command_dropped(const std::string& id) { core_.command_dropped(id); }

std::string TeleopService::task_name() const { return std::string(simcore::task_name(core_.config().task.id)); }

std::size_t TeleopService::capacity() const { return core_.config().n_envs; }

protocol::StatsReply TeleopService::stats(bool reset) {
  std::lock_guard lock(stats_mu_);
  protocol::StatsReply r;
  const std::vector<double> periods(periods_.begin(), periods_.end());
  const std::vector<double> compute(compute_.begin(), compute_.end());
  r.tick_period_median = ms(median(periods));
  r.server_loop_jitter = ms(population_stddev(periods));
  r.sim_step_median = ms(median(compute));
  r.sim_step_p95 = ms(percentile_nearest_rank(compute, 95));
  r.ticks = ticks_;
  r.demos_sealed = core_.demos_sealed();
  if (reset) {
    periods_.clear();
    compute_.clear();
  }
  return r;
}

std::map<std::uint32_t, EnvInput> TeleopService::drain() {
  std::map<std::uint32_t, EnvInput> inputs;
  std::lock_guard lock(feeds_mu_);
  for (auto& [id, feed] : feeds_) {
    EnvInput in;
    while (auto d = feed.commands.poll()) {
      if (auto* m = std::get_if<statestore::Message>(&*d)) in.commands.push_back(decode_pose_command(*m->payload));
    }
    while (auto d = feed.control.poll()) {
      if (auto* m = std::get_if<statestore::Message>(&*d); m && to_string(*m->payload) == "reset") in.reset = true;
    }
    if (!in.commands.empty() || in.reset) inputs.emplace(feed.env, std::move(in));
  }
  return inputs;
}

void TeleopService::run() {
  using clock = std::chrono::steady_clock;
  const auto period = std::chrono::duration_cast<clock::duration>(
      std::chrono::duration<double>(core_.config().tick_period));
  auto next = clock::now() + period;
  std::optional<double> last_start;
  while (!stop_) {
    std::this_thread::sleep_until(next);
    const double start = now_seconds();

    const TickResult result = core_.tick(drain(), start);
    for (const auto& e : result.events) {
      if (!forwarded(e.event.kind)) continue;
      if (auto session = core_.batch().session_of(e.env)) {
        store_.publish(statestore::event_channel(*session), to_bytes(to_string(e.event.kind)));
      }
    }
    media::pump(store_, core_.batch(), encoding_);

    const double done = now_seconds();
    {
      std::lock_guard lock(stats_mu_);
      if (last_start) push_bounded(periods_, start - *last_start);
      push_bounded(compute_, done - start);
      ++ticks_;
    }
    last_start = start;

    next += period;
    // After a long stall start a fresh schedule instead of bursting.
    if (clock::now() > next + period) next = clock::now() + period;
  }
}

}  // namespace teleop::server

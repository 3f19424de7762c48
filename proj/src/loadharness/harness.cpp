#include "teleop/loadharness/harness.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "teleop/core/errors.hpp"
#include "teleop/core/stats.hpp"

namespace teleop::loadharness {

namespace {

struct InstanceStats {
  protocol::StatsReply start;
  protocol::StatsReply end;
};

protocol::StatsReply stats_of(const net::Endpoint& ep, const std::string& token, bool reset) {
  try {
    return session::query_stats(ep, token, reset);
  } catch (const Error& e) {
    throw Error(ErrorCode::TargetUnreachable, ep.str() + ": " + e.what());
  }
}

}  // namespace

void WorkloadProfile::validate() const {
  if (clients < 1) throw std::invalid_argument("clients must be >= 1");
  if (!(send_hz > 0)) throw std::invalid_argument("send_hz must be > 0");
  if (!(duration > 0)) throw std::invalid_argument("duration must be > 0");
  if (link.loss < 0 || link.loss >= 1) throw std::invalid_argument("loss must be in [0, 1)");
}

double resident_set_mb() {
  std::ifstream in("/proc/self/statm");
  long pages = 0, resident = 0;
  if (!(in >> pages >> resident)) return 0.0;
  return static_cast<double>(resident) * static_cast<double>(sysconf(_SC_PAGESIZE)) / (1024.0 * 1024.0);
}

ScalingRow run(const WorkloadProfile& profile, const Target& target) {
  profile.validate();
  const std::vector<net::Endpoint> instances = target.instances.empty() ? std::vector{target.entry} : target.instances;

  std::vector<InstanceStats> inst(instances.size());
  for (std::size_t i = 0; i < instances.size(); ++i) inst[i].start = stats_of(instances[i], profile.token, true);

  ScalingRow row;
  row.n_clients = profile.clients;
  row.clients.resize(profile.clients);

  std::atomic<bool> done{false};
  std::vector<std::thread> threads;
  threads.reserve(profile.clients);
  for (std::size_t i = 0; i < profile.clients; ++i) {
    ClientConfig c;
    c.target = target.entry;
    c.options.token = profile.token;
    c.options.task = profile.task;
    c.options.bind_ip = "127.0." + std::to_string((profile.first_host + i) / 250) + "." +
                        std::to_string(1 + (profile.first_host + i) % 250);
    c.send_hz = profile.send_hz;
    c.duration = profile.duration;
    c.motion = profile.motion;
    c.link = profile.link;
    c.seed = profile.seed * 1000003u + i;
    threads.emplace_back([&row, i, c] { row.clients[i] = run_client(c); });
  }

  // Sample memory throughout and the instance loads once the clients settled.
  std::thread sampler([&] {
    const auto t0 = std::chrono::steady_clock::now();
    bool sampled = false;
    while (!done) {
      row.rss_mb = std::max(row.rss_mb, resident_set_mb());
      const double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (!sampled && t >= profile.duration / 2) {
        sampled = true;
        for (const auto& ep : instances) {
          try {
            row.instance_live.push_back(session::query_stats(ep, profile.token).live_sessions);
          } catch (const Error&) {
            row.instance_live.push_back(0);
          }
        }
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(250));
    }
  });

  for (auto& t : threads) t.join();
  done = true;
  sampler.join();

  // Give the instances a moment to observe the last byes.
  std::this_thread::sleep_for(std::chrono::milliseconds(300));
  for (std::size_t i = 0; i < instances.size(); ++i) inst[i].end = stats_of(instances[i], profile.token, false);

  std::vector<double> acks, frames, fps, rates;
  for (const auto& c : row.clients) {
    if (!c.connected || !c.clean_exit) ++row.failed_clients;
    acks.insert(acks.end(), c.ack_latency_ms.begin(), c.ack_latency_ms.end());
    frames.insert(frames.end(), c.frame_latency_ms.begin(), c.frame_latency_ms.end());
    if (c.connected) {
      fps.push_back(c.fps());
      rates.push_back(c.command_rate());
    }
    row.successes += c.successes;
  }
  row.ack_latency_median = median(acks);
  row.ack_latency_p95 = percentile_nearest_rank(acks, 95);
  row.frame_latency_median = median(frames);
  row.frame_latency_p95 = percentile_nearest_rank(frames, 95);
  row.fps_mean = mean(fps);
  row.fps_min = fps.empty() ? 0.0 : *std::min_element(fps.begin(), fps.end());
  row.command_rate_mean = mean(rates);
  row.command_rate_min = rates.empty() ? 0.0 : *std::min_element(rates.begin(), rates.end());

  std::vector<double> steps, steps95, periods, jitter;
  for (const auto& s : inst) {
    steps.push_back(s.end.sim_step_median);
    steps95.push_back(s.end.sim_step_p95);
    periods.push_back(s.end.tick_period_median);
    jitter.push_back(s.end.server_loop_jitter);
    row.dropped_sessions += s.end.dropped_sessions - s.start.dropped_sessions;
    row.demos_sealed += s.end.demos_sealed - s.start.demos_sealed;
  }
  row.sim_step_median = *std::max_element(steps.begin(), steps.end());
  row.sim_step_p95 = *std::max_element(steps95.begin(), steps95.end());
  row.tick_period_median = median(periods);
  row.loop_jitter = *std::max_element(jitter.begin(), jitter.end());
  return row;
}

void write_report(std::ostream& os, const std::vector<ScalingRow>& rows, char d) {
  os << "n_clients" << d << "ack_latency_median_ms" << d << "ack_latency_p95_ms" << d << "frame_latency_median_ms" << d
     << "frame_latency_p95_ms" << d << "sim_step_median_ms" << d << "sim_step_p95_ms" << d << "tick_period_median_ms"
     << d << "loop_jitter_ms" << d << "fps_per_stream" << d << "fps_min" << d << "command_hz" << d
     << "dropped_sessions" << d << "failed_clients" << d << "successes" << d << "demos_sealed" << d << "rss_mb\n";
  const auto old = os.precision(4);
  for (const auto& r : rows) {
    os << r.n_clients << d << r.ack_latency_median << d << r.ack_latency_p95 << d << r.frame_latency_median << d
       << r.frame_latency_p95 << d << r.sim_step_median << d << r.sim_step_p95 << d << r.tick_period_median << d
       << r.loop_jitter << d << r.fps_mean << d << r.fps_min << d << r.command_rate_mean << d << r.dropped_sessions
       << d << r.failed_clients << d << r.successes << d << r.demos_sealed << d << r.rss_mb << '\n';
  }
  os.precision(old);
}

}  // namespace teleop::loadharness

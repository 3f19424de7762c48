// teleopctl: run instances, gateways and load tests; inspect and clean data.

#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "teleop/core/errors.hpp"
#include "teleop/datapipe/dataset.hpp"
#include "teleop/datapipe/record_io.hpp"
#include "teleop/datapipe/replay.hpp"
#include "teleop/datapipe/writer.hpp"
#include "teleop/loadharness/harness.hpp"
#include "teleop/metrics/metrics.hpp"
#include "teleop/server/cluster.hpp"

namespace {

using namespace teleop;

void wait_for_signal() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  int sig = 0;
  sigwait(&set, &sig);
}

// Must run before any thread starts so every thread inherits the mask.
void block_signals() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
}

simcore::TaskId parse_task(const std::string& name) {
  auto t = simcore::task_from_name(name);
  if (!t) throw CLI::ValidationError("--task", "unknown task '" + name + "'");
  return *t;
}

metrics::KeySelector parse_key(const std::string& name, double rot_weight) {
  auto k = metrics::metric_key_from_string(name);
  if (!k) throw CLI::ValidationError("--key", "unknown metric '" + name + "'");
  return {*k, rot_weight};
}

struct ServeOpts {
  std::string listen = "127.0.0.1:7400";
  std::string task = "lift";
  std::size_t capacity = 4;
  std::uint64_t seed = 1;
  std::string record_dir = "demos";
  std::string instance = "local";
  std::string gateway;
  std::string encoding = "state-v1";
  std::string token{protocol::kDefaultToken};
};

int serve(const ServeOpts& o) {
  server::InstanceConfig c;
  c.core.task = simcore::make_task(parse_task(o.task));
  c.core.n_envs = o.capacity;
  c.core.seed = o.seed;
  c.core.record_dir = o.record_dir;
  c.session.listen = net::parse_endpoint(o.listen);
  c.session.instance = o.instance;
  c.session.token = o.token;
  c.encoding = media::encoding_from_name(o.encoding);
  if (!o.gateway.empty()) c.gateway = net::parse_endpoint(o.gateway);
  server::TeleopInstance inst(std::move(c));
  std::cout << "instance " << o.instance << " serving " << o.task << " on " << inst.endpoint().str() << std::endl;
  wait_for_signal();
  inst.stop();
  return 0;
}

int run_gateway(const std::string& listen, double burst, double refill) {
  gateway::GatewayConfig c;
  c.listen = net::parse_endpoint(listen);
  c.bucket = {burst, refill};
  gateway::GatewayServer gw(c);
  std::cout << "gateway on " << gw.endpoint().str() << std::endl;
  wait_for_signal();
  gw.stop();
  return 0;
}

int run_cluster(const server::ClusterConfig& c) {
  server::LocalCluster cluster(c);
  if (!cluster.wait_ready()) std::cerr << "warning: not every instance registered" << std::endl;
  std::cout << "gateway on " << cluster.gateway_endpoint().str() << '\n';
  for (std::size_t i = 0; i < cluster.size(); ++i) {
    std::cout << "instance " << cluster.instance(i).id() << " on " << cluster.instance(i).endpoint().str() << '\n';
  }
  std::cout.flush();
  wait_for_signal();
  cluster.stop();
  return 0;
}

int metrics_report(const std::string& dir, std::size_t window) {
  for (const auto& p : datapipe::scan(dir).sealed) {
    const DemonstrationRecord rec = datapipe::read_record(p);
    if (rec.rows.empty()) continue;
    std::cout << datapipe::serialize_report(metrics::build_report(rec, window)) << '\n';
  }
  return 0;
}

int metrics_filter(const std::string& dir, double pct, const metrics::KeySelector& key) {
  const auto reports = datapipe::load_reports(dir);
  for (const auto& id : metrics::filter_by_percentile(reports, pct, key)) std::cout << id << '\n';
  return 0;
}

int data_stats(const std::string& dir, const std::string& manifest) {
  std::optional<std::set<std::string>> ids;
  if (!manifest.empty()) {
    const auto m = datapipe::read_manifest(manifest);
    ids.emplace(m.kept.begin(), m.kept.end());
  }
  const auto s = datapipe::dataset_stats(dir, ids);
  std::cout << std::left << std::setw(24) << "task" << std::right << std::setw(8) << "demos" << std::setw(10)
            << "success" << std::setw(10) << "hours" << '\n'
            << std::fixed << std::setprecision(4);
  auto line = [](const std::string& name, const datapipe::TaskStats& t) {
    std::cout << std::left << std::setw(24) << name << std::right << std::setw(8) << t.demos << std::setw(10)
              << t.successes << std::setw(10) << t.hours << '\n';
  };
  for (const auto& [task, t] : s.per_task) line(task, t);
  line("total", s.total);
  if (s.quarantined) std::cout << s.quarantined << " partial file(s) moved to " << datapipe::kQuarantineDir << "/\n";
  return 0;
}

int data_clean(const std::string& dir, double pct, const metrics::KeySelector& key, const std::string& out) {
  const auto m = datapipe::clean(dir, pct, key);
  datapipe::write_manifest(out, m);
  std::cout << "kept " << m.kept.size() << " demo(s); manifest written to " << out << '\n';
  return 0;
}

int data_replay(const std::string& file) {
  const DemonstrationRecord rec = datapipe::read_record(file);
  try {
    datapipe::replay(rec);
  } catch (const DivergenceError& e) {
    std::cout << "divergence at tick " << e.tick() << ": " << e.what() << '\n';
    return 1;
  }
  std::cout << "ok: " << rec.rows.size() << " ticks replayed without divergence\n";
  return 0;
}

struct LoadOpts {
  std::vector<std::size_t> clients{8};
  double duration = 60;
  std::string link = "loopback";
  std::string out;
  std::string target;
  std::vector<std::string> instances;
  std::string motion = "scripted";
  double send_hz = 20;
  std::string task = "lift";
  std::string encoding = "state-v1";
  std::uint64_t seed = 1;
};

int load_run(const LoadOpts& o) {
  std::vector<loadharness::ScalingRow> rows;
  for (const std::size_t n : o.clients) {
    loadharness::WorkloadProfile p;
    p.clients = n;
    p.duration = o.duration;
    p.link = loadharness::parse_link(o.link);
    p.motion = loadharness::motion_from_name(o.motion);
    p.send_hz = o.send_hz;
    p.seed = o.seed;
    p.task = o.task;

    std::unique_ptr<server::TeleopInstance> local;
    loadharness::Target target;
    if (o.target.empty()) {
      // Fresh in-process instance per row so rows do not share state.
      server::InstanceConfig c;
      c.core.task = simcore::make_task(parse_task(o.task));
      c.core.n_envs = n;
      c.core.seed = o.seed;
      c.encoding = media::encoding_from_name(o.encoding);
      local = std::make_unique<server::TeleopInstance>(std::move(c));
      target.entry = local->endpoint();
    } else {
      target.entry = net::parse_endpoint(o.target);
      for (const auto& i : o.instances) target.instances.push_back(net::parse_endpoint(i));
    }
    std::cerr << "running " << n << " client(s) for " << o.duration << " s against " << target.entry.str() << "\n";
    rows.push_back(loadharness::run(p, target));
  }
  if (o.out.empty()) {
    loadharness::write_report(std::cout, rows);
  } else {
    std::ofstream f(o.out);
    loadharness::write_report(f, rows);
    std::cerr << "report written to " << o.out << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"teleoperation server, gateway, load harness and dataset tools"};
  app.require_subcommand(1);
  std::function<int()> action;

  ServeOpts so;
  auto* serve_cmd = app.add_subcommand("serve", "run one teleop instance");
  serve_cmd->add_option("--listen", so.listen, "host:port");
  serve_cmd->add_option("--task", so.task);
  serve_cmd->add_option("--capacity", so.capacity, "environments (concurrent sessions)")->check(CLI::Range(1, 64));
  serve_cmd->add_option("--seed", so.seed);
  serve_cmd->add_option("--record-dir", so.record_dir);
  serve_cmd->add_option("--instance", so.instance, "instance id");
  serve_cmd->add_option("--gateway", so.gateway, "register with this gateway (host:port)");
  serve_cmd->add_option("--encoding", so.encoding, "state-v1 or raster-v1");
  serve_cmd->add_option("--token", so.token);
  serve_cmd->callback([&] { action = [&] { return serve(so); }; });

  std::string gw_listen = "127.0.0.1:7300";
  double burst = 5, refill = 1;
  auto* gw_cmd = app.add_subcommand("gateway", "run the routing gateway");
  gw_cmd->add_option("--listen", gw_listen);
  gw_cmd->add_option("--burst", burst, "handshakes per address before throttling");
  gw_cmd->add_option("--refill", refill, "tokens per second");
  gw_cmd->callback([&] { action = [&] { return run_gateway(gw_listen, burst, refill); }; });

  server::ClusterConfig cc;
  std::string cluster_task = "lift", cluster_dir = "demos";
  auto* cl_cmd = app.add_subcommand("cluster", "run a gateway and several instances in one process");
  cl_cmd->add_option("--instances", cc.instances)->check(CLI::Range(1, 64));
  cl_cmd->add_option("--capacity", cc.capacity)->check(CLI::Range(1, 64));
  cl_cmd->add_option("--task", cluster_task);
  cl_cmd->add_option("--record-dir", cluster_dir);
  cl_cmd->add_option("--seed", cc.seed);
  cl_cmd->callback([&] {
    action = [&] {
      cc.task = parse_task(cluster_task);
      cc.record_dir = cluster_dir;
      return run_cluster(cc);
    };
  });

  auto* metrics_cmd = app.add_subcommand("metrics", "trajectory metrics");
  metrics_cmd->require_subcommand(1);
  std::string m_dir;
  std::size_t window = metrics::kDefaultJitterWindow;
  double m_pct = 50, rot_weight = 0;
  std::string m_key = "d_trans";
  auto* report_cmd = metrics_cmd->add_subcommand("report", "one metric report per demo, line-delimited");
  report_cmd->add_option("dir", m_dir)->required();
  report_cmd->add_option("--window", window, "jitter window in samples")->check(CLI::PositiveNumber);
  report_cmd->callback([&] { action = [&] { return metrics_report(m_dir, window); }; });
  auto* filter_cmd = metrics_cmd->add_subcommand("filter", "ids within the per-task percentile");
  filter_cmd->add_option("dir", m_dir)->required();
  filter_cmd->add_option("--percentile", m_pct)->check(CLI::Range(0.0, 100.0));
  filter_cmd->add_option("--key", m_key, "d_trans, d_rot, path_length, completion_time, j_trans, j_rot");
  filter_cmd->add_option("--rot-weight", rot_weight, "meters per radian for path_length");
  filter_cmd->callback([&] { action = [&] { return metrics_filter(m_dir, m_pct, parse_key(m_key, rot_weight)); }; });

  auto* data_cmd = app.add_subcommand("data", "demonstration datasets");
  data_cmd->require_subcommand(1);
  std::string d_dir, d_out = "manifest.json", d_manifest, d_file;
  double d_pct = 50, d_rot = 0;
  std::string d_key = "d_trans";
  auto* stats_cmd = data_cmd->add_subcommand("stats", "demo counts and hours per task");
  stats_cmd->add_option("dir", d_dir)->required();
  stats_cmd->add_option("--manifest", d_manifest, "count only the demos a manifest kept");
  stats_cmd->callback([&] { action = [&] { return data_stats(d_dir, d_manifest); }; });
  auto* clean_cmd = data_cmd->add_subcommand("clean", "write a manifest of demos within the percentile");
  clean_cmd->add_option("dir", d_dir)->required();
  clean_cmd->add_option("--percentile", d_pct)->check(CLI::Range(0.0, 100.0));
  clean_cmd->add_option("--key", d_key);
  clean_cmd->add_option("--rot-weight", d_rot);
  clean_cmd->add_option("--out", d_out);
  clean_cmd->callback([&] { action = [&] { return data_clean(d_dir, d_pct, parse_key(d_key, d_rot), d_out); }; });
  auto* replay_cmd = data_cmd->add_subcommand("replay", "re-simulate a record and compare every tick");
  replay_cmd->add_option("file", d_file)->required()->check(CLI::ExistingFile);
  replay_cmd->callback([&] { action = [&] { return data_replay(d_file); }; });

  auto* load_cmd = app.add_subcommand("load", "load harness");
  load_cmd->require_subcommand(1);
  LoadOpts lo;
  auto* run_cmd = load_cmd->add_subcommand("run", "drive scripted clients and print a scaling table");
  run_cmd->add_option("--clients", lo.clients, "one row per value, e.g. --clients 1 2 4 8");
  run_cmd->add_option("--duration", lo.duration, "seconds per row")->check(CLI::PositiveNumber);
  run_cmd->add_option("--link", lo.link, "loopback or wan:<ms>[:<sigma>[:<loss>]]");
  run_cmd->add_option("--out", lo.out, "report file (default stdout)");
  run_cmd->add_option("--target", lo.target, "instance or gateway host:port (default: in-process instance)");
  run_cmd->add_option("--instances", lo.instances, "instance endpoints to read statistics from");
  run_cmd->add_option("--motion", lo.motion, "scripted, random-walk or zero");
  run_cmd->add_option("--send-hz", lo.send_hz)->check(CLI::PositiveNumber);
  run_cmd->add_option("--task", lo.task);
  run_cmd->add_option("--encoding", lo.encoding, "frame encoding of the in-process instance");
  run_cmd->add_option("--seed", lo.seed);
  run_cmd->callback([&] { action = [&] { return load_run(lo); }; });

  CLI11_PARSE(app, argc, argv);
  block_signals();
  try {
    return action ? action() : 1;
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}

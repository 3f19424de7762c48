#include "teleop/datapipe/record_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace teleop::datapipe {

using nlohmann::json;

namespace {

[[noreturn]] void corrupt(const std::string& why) { throw Error(ErrorCode::CorruptRecord, why); }

json pose_json(const geometry::Pose& p) {
  return json::array({p.position.x, p.position.y, p.position.z, p.orientation.w, p.orientation.x, p.orientation.y,
                      p.orientation.z});
}

geometry::Pose pose_from(const json& j) {
  if (!j.is_array() || j.size() != 7) corrupt("pose must have 7 numbers");
  geometry::Pose p;
  p.position = {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
  p.orientation = {j[3].get<double>(), j[4].get<double>(), j[5].get<double>(), j[6].get<double>()};
  return p;
}

json command_json(const PoseCommand& c) {
  return {{"seq", c.seq},
          {"t_client", c.t_client},
          {"t_receive", c.t_receive},
          {"clock_offset", c.clock_offset},
          {"dpos", {c.dpos.x, c.dpos.y, c.dpos.z}},
          {"drot", {c.drot.w, c.drot.x, c.drot.y, c.drot.z}},
          {"gripper", c.gripper_closed ? 1 : 0}};
}

PoseCommand command_from(const json& j) {
  PoseCommand c;
  c.seq = j.at("seq").get<std::uint64_t>();
  c.t_client = j.at("t_client").get<double>();
  c.t_receive = j.at("t_receive").get<double>();
  c.clock_offset = j.at("clock_offset").get<double>();
  const json& d = j.at("dpos");
  c.dpos = {d.at(0).get<double>(), d.at(1).get<double>(), d.at(2).get<double>()};
  const json& r = j.at("drot");
  c.drot = {r.at(0).get<double>(), r.at(1).get<double>(), r.at(2).get<double>(), r.at(3).get<double>()};
  c.gripper_closed = j.at("gripper").get<int>() != 0;
  return c;
}

json report_json(const metrics::MetricReport& r) {
  return {{"demo_id", r.demo_id},
          {"task", r.task},
          {"completion_time", r.completion_time},
          {"d_trans", r.d_trans},
          {"d_rot", r.d_rot},
          {"j_trans", r.j_trans},
          {"j_rot", r.j_rot},
          {"server_loop_jitter", r.server_loop_jitter},
          {"client_loop_jitter", r.client_loop_jitter},
          {"latency_median", r.latency.median},
          {"latency_p95", r.latency.p95},
          {"reset_count", r.reset_count},
          {"success", r.success},
          {"jitter_undefined", r.jitter_undefined},
          {"no_commands", r.no_commands}};
}

metrics::MetricReport report_from(const json& j) {
  metrics::MetricReport r;
  r.demo_id = j.at("demo_id").get<std::string>();
  r.task = j.at("task").get<std::string>();
  r.completion_time = j.at("completion_time").get<double>();
  r.d_trans = j.at("d_trans").get<double>();
  r.d_rot = j.at("d_rot").get<double>();
  r.j_trans = j.at("j_trans").get<double>();
  r.j_rot = j.at("j_rot").get<double>();
  r.server_loop_jitter = j.at("server_loop_jitter").get<double>();
  r.client_loop_jitter = j.at("client_loop_jitter").get<double>();
  r.latency.median = j.at("latency_median").get<double>();
  r.latency.p95 = j.at("latency_p95").get<double>();
  r.reset_count = j.at("reset_count").get<std::int64_t>();
  r.success = j.at("success").get<bool>();
  r.jitter_undefined = j.at("jitter_undefined").get<bool>();
  r.no_commands = j.at("no_commands").get<bool>();
  return r;
}

}  // namespace

std::string header_line(const RecordHeader& h) {
  const json j = {{"kind", "header"},      {"schema", h.schema},       {"demo_id", h.demo_id},
                  {"task", h.task},        {"instance", h.instance},   {"session", h.session},
                  {"device", h.device},    {"seed", h.seed},           {"n_envs", h.n_envs},
                  {"env_index", h.env_index}, {"episode", h.episode}, {"clock_offset", h.clock_offset},
                  {"tick_period", h.tick_period}};
  return j.dump();
}

std::string row_line(const TickRow& row) {
  json events = json::array();
  for (const auto& e : row.events) {
    json ev = {{"kind", std::string(to_string(e.kind))}};
    if (e.target) ev["target"] = pose_json(*e.target);
    events.push_back(std::move(ev));
  }
  json j = {{"kind", "row"},
            {"tick", row.tick},
            {"t_server", row.t_server},
            {"effector", pose_json(row.effector)},
            {"gripper", row.gripper_closed ? 1 : 0},
            {"events", std::move(events)}};
  if (row.command) j["command"] = command_json(*row.command);
  return j.dump();
}

std::string footer_line(const DemonstrationRecord& rec) {
  json latency = json::array();
  for (const auto& s : rec.latency) latency.push_back({s.seq, s.client_send, s.server_receive, s.clock_offset});
  json j = {{"kind", "footer"},
            {"outcome", std::string(to_string(rec.outcome))},
            {"reset_count", rec.reset_count},
            {"dropped_commands", rec.dropped_commands},
            {"rows", rec.rows.size()},
            {"latency", std::move(latency)},
            {"report", rec.report ? report_json(*rec.report) : json(nullptr)}};
  return j.dump();
}

std::string serialize(const DemonstrationRecord& rec) {
  std::string out = header_line(rec.header);
  out += '\n';
  for (const auto& r : rec.rows) {
    out += row_line(r);
    out += '\n';
  }
  out += footer_line(rec);
  out += '\n';
  return out;
}

DemonstrationRecord parse_record(std::string_view text) {
  DemonstrationRecord rec;
  bool have_header = false;
  bool have_footer = false;
  std::size_t pos = 0;
  std::uint64_t line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    if (have_footer) corrupt("content after footer");
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) corrupt("line " + std::to_string(line_no) + " is not a JSON object");
    try {
      const std::string kind = j.at("kind").get<std::string>();
      if (kind == "header") {
        if (have_header) corrupt("second header");
        have_header = true;
        RecordHeader& h = rec.header;
        h.schema = j.at("schema").get<int>();
        if (h.schema != kRecordSchemaVersion) corrupt("unsupported record schema " + std::to_string(h.schema));
        h.demo_id = j.at("demo_id").get<std::string>();
        h.task = j.at("task").get<std::string>();
        h.instance = j.at("instance").get<std::string>();
        h.session = j.at("session").get<std::string>();
        h.device = j.at("device").get<std::string>();
        h.seed = j.at("seed").get<std::uint64_t>();
        h.n_envs = j.at("n_envs").get<std::uint32_t>();
        h.env_index = j.at("env_index").get<std::uint32_t>();
        h.episode = j.at("episode").get<std::uint64_t>();
        h.clock_offset = j.at("clock_offset").get<double>();
        h.tick_period = j.at("tick_period").get<double>();
      } else if (kind == "row") {
        if (!have_header) corrupt("row before header");
        TickRow r;
        r.tick = j.at("tick").get<std::uint64_t>();
        r.t_server = j.at("t_server").get<double>();
        r.effector = pose_from(j.at("effector"));
        r.gripper_closed = j.at("gripper").get<int>() != 0;
        for (const auto& ev : j.at("events")) {
          const auto k = event_kind_from_string(ev.at("kind").get<std::string>());
          if (!k) corrupt("unknown event kind");
          Event e{*k, std::nullopt};
          if (ev.contains("target")) e.target = pose_from(ev.at("target"));
          r.events.push_back(e);
        }
        if (j.contains("command")) r.command = command_from(j.at("command"));
        rec.rows.push_back(std::move(r));
      } else if (kind == "footer") {
        if (!have_header) corrupt("footer before header");
        have_footer = true;
        const auto o = outcome_from_string(j.at("outcome").get<std::string>());
        if (!o) corrupt("unknown outcome");
        rec.outcome = *o;
        rec.reset_count = j.at("reset_count").get<std::int64_t>();
        rec.dropped_commands = j.at("dropped_commands").get<std::uint64_t>();
        if (j.at("rows").get<std::uint64_t>() != rec.rows.size()) corrupt("row count does not match footer");
        for (const auto& s : j.at("latency")) {
          rec.latency.push_back({s.at(0).get<std::uint64_t>(), s.at(1).get<double>(), s.at(2).get<double>(),
                                 s.at(3).get<double>()});
        }
        if (!j.at("report").is_null()) rec.report = report_from(j.at("report"));
      } else {
        corrupt("unknown line kind '" + kind + "'");
      }
    } catch (const json::exception& e) {
      corrupt("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!have_header) corrupt("missing header");
  if (!have_footer) corrupt("missing footer (partial record)");
  return rec;
}

DemonstrationRecord read_record(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) corrupt("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_record(ss.str());
}

void write_record(const std::filesystem::path& path, const DemonstrationRecord& rec) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) corrupt("cannot write " + path.string());
  out << serialize(rec);
  if (!out) corrupt("write failed for " + path.string());
}

std::filesystem::path record_path(const std::filesystem::path& dir, const std::string& demo_id) {
  return dir / (demo_id + std::string(kRecordExtension));
}

std::string serialize_report(const metrics::MetricReport& r) { return report_json(r).dump(); }

metrics::MetricReport parse_report(std::string_view text) {
  const json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) corrupt("report is not JSON");
  try {
    return report_from(j);
  } catch (const json::exception& e) {
    corrupt(e.what());
  }
}

}  // namespace teleop::datapipe

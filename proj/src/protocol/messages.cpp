#include "teleop/protocol/messages.hpp"

#include <cmath>

#include "json.hpp"

namespace teleop::protocol {

using nlohmann::json;

namespace {

[[noreturn]] void malformed(const std::string& why) { throw Error(ErrorCode::MalformedMessage, why); }

const json& field(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) malformed(std::string("missing field '") + key + "'");
  return *it;
}

double number(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_number()) malformed(std::string("field '") + key + "' must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) malformed(std::string("field '") + key + "' must be finite");
  return d;
}

std::optional<double> opt_number(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return number(j, key);
}

std::uint64_t count(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    malformed(std::string("field '") + key + "' must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::string text(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_string()) malformed(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

std::string opt_text(const json& j, const char* key, std::string fallback = {}) {
  return j.contains(key) ? text(j, key) : fallback;
}

bool flag(const json& j, const char* key, bool fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_number_integer() && (v.get<std::int64_t>() == 0 || v.get<std::int64_t>() == 1)) return v.get<std::int64_t>() == 1;
  malformed(std::string("field '") + key + "' must be 0|1");
}

template <std::size_t N>
std::array<double, N> vec(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_array() || v.size() != N) malformed(std::string("field '") + key + "' must have " + std::to_string(N) + " numbers");
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    if (!v[i].is_number()) malformed(std::string("field '") + key + "' must hold numbers");
    out[i] = v[i].get<double>();
    if (!std::isfinite(out[i])) malformed(std::string("field '") + key + "' must be finite");
  }
  return out;
}

json parse_object(std::string_view s) {
  json j = json::parse(s, nullptr, false);
  if (j.is_discarded() || !j.is_object()) malformed("not a JSON object");
  return j;
}

}  // namespace

std::string encode(const ClientMessage& m) {
  json j = std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Hello>) {
          json o{{"type", "hello"}, {"protocol", v.protocol}, {"device", v.device}, {"token", v.token}};
          if (v.task) o["task"] = *v.task;
          return o;
        } else if constexpr (std::is_same_v<T, Ping>) {
          json o{{"type", "ping"}, {"seq", v.seq}, {"t0", v.t0}};
          if (v.t1_prev) o["t1_prev"] = *v.t1_prev;
          return o;
        } else if constexpr (std::is_same_v<T, Pose>) {
          return {{"type", "pose"}, {"seq", v.seq},   {"t_client", v.t_client},
                  {"dpos", v.dpos}, {"drot", v.drot}, {"gripper", v.gripper ? 1 : 0}};
        } else if constexpr (std::is_same_v<T, Reset>) {
          return {{"type", "reset"}};
        } else if constexpr (std::is_same_v<T, Bye>) {
          return {{"type", "bye"}};
        } else if constexpr (std::is_same_v<T, StatsRequest>) {
          return {{"type", "stats"}, {"token", v.token}, {"reset", v.reset}};
        } else if constexpr (std::is_same_v<T, Register>) {
          return {{"type", "register"}, {"instance", v.instance}, {"address", v.address},
                  {"task", v.task},     {"capacity", v.capacity}, {"live", v.live}};
        } else if constexpr (std::is_same_v<T, Heartbeat>) {
          return {{"type", "heartbeat"}, {"instance", v.instance}, {"live", v.live}};
        } else {
          return {{"type", "release"}, {"instance", v.instance}};
        }
      },
      m);
  return j.dump();
}

std::string encode(const ServerMessage& m) {
  json j = std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Welcome>) {
          return {{"type", "welcome"}, {"session", v.session},         {"env", v.env},
                  {"task", v.task},    {"tick_hz", v.tick_hz},         {"schema", v.schema},
                  {"clock_offset", v.clock_offset}, {"instance", v.instance}};
        } else if constexpr (std::is_same_v<T, Pong>) {
          return {{"type", "pong"}, {"seq", v.seq}, {"t0", v.t0}, {"t_server", v.t_server}};
        } else if constexpr (std::is_same_v<T, Ack>) {
          return {{"type", "ack"}, {"seq", v.seq}, {"t_server", v.t_server}};
        } else if constexpr (std::is_same_v<T, EventNotice>) {
          return {{"type", "event"}, {"kind", v.kind}};
        } else if constexpr (std::is_same_v<T, Err>) {
          return {{"type", "err"}, {"code", v.code}, {"detail", v.detail}};
        } else if constexpr (std::is_same_v<T, Redirect>) {
          return {{"type", "redirect"}, {"address", v.address}, {"instance", v.instance}};
        } else {
          return {{"type", "stats"},
                  {"instance", v.instance},
                  {"task", v.task},
                  {"tick_period_median", v.tick_period_median},
                  {"sim_step_median", v.sim_step_median},
                  {"sim_step_p95", v.sim_step_p95},
                  {"server_loop_jitter", v.server_loop_jitter},
                  {"ticks", v.ticks},
                  {"live_sessions", v.live_sessions},
                  {"capacity", v.capacity},
                  {"sessions_started", v.sessions_started},
                  {"dropped_sessions", v.dropped_sessions},
                  {"demos_sealed", v.demos_sealed}};
        }
      },
      m);
  return j.dump();
}

ClientMessage parse_client(std::string_view s) {
  const json j = parse_object(s);
  const std::string type = text(j, "type");
  if (type == "hello") {
    Hello h;
    h.protocol = static_cast<int>(number(j, "protocol"));
    h.device = opt_text(j, "device", "sim");
    h.token = opt_text(j, "token");
    if (j.contains("task")) h.task = text(j, "task");
    return h;
  }
  if (type == "ping") return Ping{count(j, "seq"), number(j, "t0"), opt_number(j, "t1_prev")};
  if (type == "pose") {
    Pose p;
    p.seq = count(j, "seq");
    p.t_client = number(j, "t_client");
    p.dpos = vec<3>(j, "dpos");
    p.drot = vec<4>(j, "drot");
    const auto& r = p.drot;
    if (r[0] * r[0] + r[1] * r[1] + r[2] * r[2] + r[3] * r[3] < 1e-12) malformed("drot has zero norm");
    p.gripper = flag(j, "gripper", false);
    return p;
  }
  if (type == "reset") return Reset{};
  if (type == "bye") return Bye{};
  if (type == "stats") return StatsRequest{opt_text(j, "token"), flag(j, "reset", false)};
  if (type == "register") {
    return Register{text(j, "instance"), text(j, "address"), text(j, "task"),
                    static_cast<std::uint32_t>(count(j, "capacity")),
                    j.contains("live") ? static_cast<std::uint32_t>(count(j, "live")) : 0u};
  }
  if (type == "heartbeat") return Heartbeat{text(j, "instance"), static_cast<std::uint32_t>(count(j, "live"))};
  if (type == "release") return Release{text(j, "instance")};
  throw Error(ErrorCode::UnknownMessageType, "unknown message type '" + type + "'");
}

ServerMessage parse_server(std::string_view s) {
  const json j = parse_object(s);
  const std::string type = text(j, "type");
  if (type == "welcome") {
    Welcome w;
    w.session = text(j, "session");
    w.env = static_cast<std::uint32_t>(count(j, "env"));
    w.task = text(j, "task");
    w.tick_hz = static_cast<int>(number(j, "tick_hz"));
    w.schema = static_cast<int>(number(j, "schema"));
    w.clock_offset = opt_number(j, "clock_offset").value_or(0.0);
    w.instance = opt_text(j, "instance");
    return w;
  }
  if (type == "pong") return Pong{count(j, "seq"), number(j, "t0"), number(j, "t_server")};
  if (type == "ack") return Ack{count(j, "seq"), number(j, "t_server")};
  if (type == "event") return EventNotice{text(j, "kind")};
  if (type == "err") return Err{text(j, "code"), opt_text(j, "detail")};
  if (type == "redirect") return Redirect{text(j, "address"), opt_text(j, "instance")};
  if (type == "stats") {
    StatsReply r;
    r.instance = opt_text(j, "instance");
    r.task = opt_text(j, "task");
    r.tick_period_median = number(j, "tick_period_median");
    r.sim_step_median = number(j, "sim_step_median");
    r.sim_step_p95 = number(j, "sim_step_p95");
    r.server_loop_jitter = number(j, "server_loop_jitter");
    r.ticks = count(j, "ticks");
    r.live_sessions = static_cast<std::uint32_t>(count(j, "live_sessions"));
    r.capacity = static_cast<std::uint32_t>(count(j, "capacity"));
    r.sessions_started = count(j, "sessions_started");
    r.dropped_sessions = count(j, "dropped_sessions");
    r.demos_sealed = count(j, "demos_sealed");
    return r;
  }
  throw Error(ErrorCode::UnknownMessageType, "unknown message type '" + type + "'");
}

Err make_err(ErrorCode code, std::string detail) { return Err{std::string(to_string(code)), std::move(detail)}; }

}  // namespace teleop::protocol

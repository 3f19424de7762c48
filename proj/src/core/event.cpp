#include "teleop/core/event.hpp"

#include <array>
#include <utility>

namespace teleop {

namespace {
constexpr std::array<std::pair<EventKind, std::string_view>, 9> kNames{{
    {EventKind::success, "success"},
    {EventKind::timeout, "timeout"},
    {EventKind::reset, "reset"},
    {EventKind::reset_request, "reset_request"},
    {EventKind::target_hit, "target_hit"},
    {EventKind::target_miss, "target_miss"},
    {EventKind::beam_exit, "beam_exit"},
    {EventKind::grasp, "grasp"},
    {EventKind::release, "release"},
}};
}  // namespace

std::string_view to_string(EventKind kind) {
  for (const auto& [k, name] : kNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<EventKind> event_kind_from_string(std::string_view s) {
  for (const auto& [k, name] : kNames) {
    if (name == s) return k;
  }
  return std::nullopt;
}

}  // namespace teleop

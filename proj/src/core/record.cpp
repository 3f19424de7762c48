#include "teleop/core/record.hpp"

namespace teleop {

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::success: return "success";
    case Outcome::failure: return "failure";
    case Outcome::abandoned: return "abandoned";
  }
  return "abandoned";
}

std::optional<Outcome> outcome_from_string(std::string_view s) {
  if (s == "success") return Outcome::success;
  if (s == "failure") return Outcome::failure;
  if (s == "abandoned") return Outcome::abandoned;
  return std::nullopt;
}

}  // namespace teleop

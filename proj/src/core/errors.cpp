#include "teleop/core/errors.hpp"

namespace teleop {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroNorm: return "ZeroNorm";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::EmptyDemo: return "EmptyDemo";
    case ErrorCode::PayloadTooLarge: return "PayloadTooLarge";
    case ErrorCode::InvalidCount: return "InvalidCount";
    case ErrorCode::BatchFull: return "BatchFull";
    case ErrorCode::UnknownSession: return "UnknownSession";
    case ErrorCode::Unassigned: return "Unassigned";
    case ErrorCode::WrongTask: return "WrongTask";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::NoCapacity: return "NoCapacity";
    case ErrorCode::Unauthorized: return "Unauthorized";
    case ErrorCode::TooFewPings: return "TooFewPings";
    case ErrorCode::MalformedMessage: return "MalformedMessage";
    case ErrorCode::UnknownMessageType: return "UnknownMessageType";
    case ErrorCode::SessionExpired: return "SessionExpired";
    case ErrorCode::UnsupportedEncoding: return "UnsupportedEncoding";
    case ErrorCode::ConnectionClosed: return "ConnectionClosed";
    case ErrorCode::NoInstance: return "NoInstance";
    case ErrorCode::UnknownInstance: return "UnknownInstance";
    case ErrorCode::RateLimited: return "RateLimited";
    case ErrorCode::OutOfOrderTick: return "OutOfOrderTick";
    case ErrorCode::DivergenceAt: return "DivergenceAt";
    case ErrorCode::CorruptRecord: return "CorruptRecord";
    case ErrorCode::TargetUnreachable: return "TargetUnreachable";
    case ErrorCode::UnsupportedTask: return "UnsupportedTask";
  }
  return "Unknown";
}

std::optional<ErrorCode> error_code_from_string(std::string_view s) {
  for (int i = 0; i <= static_cast<int>(ErrorCode::UnsupportedTask); ++i) {
    const auto code = static_cast<ErrorCode>(i);
    if (to_string(code) == s) return code;
  }
  return std::nullopt;
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

DivergenceError::DivergenceError(std::uint64_t tick, const std::string& detail)
    : Error(ErrorCode::DivergenceAt, "tick " + std::to_string(tick) + ": " + detail),
      tick_(tick) {}

}  // namespace teleop

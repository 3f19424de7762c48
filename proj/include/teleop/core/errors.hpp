#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace teleop {

enum class ErrorCode {
  // geometry
  ZeroNorm,
  // metrics
  TooShort,
  EmptyDemo,
  // statestore
  PayloadTooLarge,
  // simcore
  InvalidCount,
  BatchFull,
  UnknownSession,
  Unassigned,
  WrongTask,
  // session
  VersionMismatch,
  NoCapacity,
  Unauthorized,
  TooFewPings,
  MalformedMessage,
  UnknownMessageType,
  SessionExpired,
  // media / net
  UnsupportedEncoding,
  ConnectionClosed,
  // gateway
  NoInstance,
  UnknownInstance,
  RateLimited,
  // datapipe
  OutOfOrderTick,
  DivergenceAt,
  CorruptRecord,
  // loadharness
  TargetUnreachable,
  UnsupportedTask,
};

std::string_view to_string(ErrorCode code);
std::optional<ErrorCode> error_code_from_string(std::string_view s);

/// Base exception for every recoverable failure in the library. The code is
/// what callers switch on; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by replay when a logged pose does not match the simulator.
class DivergenceError : public Error {
 public:
  DivergenceError(std::uint64_t tick, const std::string& detail);

  [[nodiscard]] std::uint64_t tick() const noexcept { return tick_; }

 private:
  std::uint64_t tick_;
};

}  // namespace teleop

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "teleop/core/bytes.hpp"

namespace teleop::net::ws {

enum class Opcode : std::uint8_t { continuation = 0x0, text = 0x1, binary = 0x2, close = 0x8, ping = 0x9, pong = 0xA };

/// Sec-WebSocket-Accept value for a client key.
std::string accept_key(std::string_view client_key);

std::string base64(ByteView data);

/// One frame. A mask is applied when given (clients must mask).
Bytes encode_frame(Opcode op, ByteView payload, bool fin = true,
                   std::optional<std::array<std::uint8_t, 4>> mask = std::nullopt);

struct Frame {
  bool fin = true;
  Opcode opcode = Opcode::text;
  Bytes payload;  // unmasked
};

/// Parses one frame from the front of `buffer`, returning it and the bytes
/// consumed, or nullopt if the frame is incomplete. Throws
/// Error(MalformedMessage) for reserved bits, bad opcodes, oversized
/// control frames or payloads above max_payload.
std::optional<std::pair<Frame, std::size_t>> parse_frame(ByteView buffer, std::size_t max_payload);

/// Case-insensitive header lookup in a raw HTTP header block.
std::optional<std::string> header_value(std::string_view headers, std::string_view name);

}  // namespace teleop::net::ws

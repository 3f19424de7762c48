#include "teleop/net/websocket.hpp"

#include <openssl/evp.h>
#include <openssl/sha.h>

#include <algorithm>
#include <cctype>

#include "teleop/core/errors.hpp"

namespace teleop::net::ws {

namespace {
constexpr std::string_view kGuid = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11";

bool known_opcode(std::uint8_t op) { return op <= 0x2 || (op >= 0x8 && op <= 0xA); }
}  // namespace

std::string base64(ByteView data) {
  std::string out(4 * ((data.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), data.data(), static_cast<int>(data.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::string accept_key(std::string_view client_key) {
  const std::string joined = std::string(client_key) + std::string(kGuid);
  std::array<std::uint8_t, SHA_DIGEST_LENGTH> digest{};
  SHA1(reinterpret_cast<const unsigned char*>(joined.data()), joined.size(), digest.data());
  return base64(digest);
}

Bytes encode_frame(Opcode op, ByteView payload, bool fin, std::optional<std::array<std::uint8_t, 4>> mask) {
  Bytes out;
  out.reserve(payload.size() + 14);
  out.push_back(static_cast<std::uint8_t>((fin ? 0x80 : 0x00) | static_cast<std::uint8_t>(op)));
  const std::uint8_t mask_bit = mask ? 0x80 : 0x00;
  const std::size_t n = payload.size();
  if (n < 126) {
    out.push_back(static_cast<std::uint8_t>(mask_bit | n));
  } else if (n <= 0xFFFF) {
    out.push_back(mask_bit | 126);
    out.push_back(static_cast<std::uint8_t>(n >> 8));
    out.push_back(static_cast<std::uint8_t>(n));
  } else {
    out.push_back(mask_bit | 127);
    for (int i = 7; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(static_cast<std::uint64_t>(n) >> (8 * i)));
  }
  if (mask) {
    out.insert(out.end(), mask->begin(), mask->end());
    for (std::size_t i = 0; i < n; ++i) out.push_back(payload[i] ^ (*mask)[i % 4]);
  } else {
    out.insert(out.end(), payload.begin(), payload.end());
  }
  return out;
}

std::optional<std::pair<Frame, std::size_t>> parse_frame(ByteView buf, std::size_t max_payload) {
  if (buf.size() < 2) return std::nullopt;
  const std::uint8_t b0 = buf[0];
  const std::uint8_t b1 = buf[1];
  if (b0 & 0x70) throw Error(ErrorCode::MalformedMessage, "reserved websocket bits set");
  const std::uint8_t op = b0 & 0x0F;
  if (!known_opcode(op)) throw Error(ErrorCode::MalformedMessage, "unknown websocket opcode");
  const bool masked = (b1 & 0x80) != 0;
  std::uint64_t len = b1 & 0x7F;
  std::size_t pos = 2;
  if (len == 126) {
    if (buf.size() < 4) return std::nullopt;
    len = (std::uint64_t{buf[2]} << 8) | buf[3];
    pos = 4;
  } else if (len == 127) {
    if (buf.size() < 10) return std::nullopt;
    len = 0;
    for (int i = 0; i < 8; ++i) len = (len << 8) | buf[2 + static_cast<std::size_t>(i)];
    pos = 10;
  }
  const bool control = op >= 0x8;
  if (control && (len > 125 || !(b0 & 0x80))) throw Error(ErrorCode::MalformedMessage, "bad websocket control frame");
  if (len > max_payload) throw Error(ErrorCode::MalformedMessage, "websocket payload too large");
  std::array<std::uint8_t, 4> key{};
  if (masked) {
    if (buf.size() < pos + 4) return std::nullopt;
    std::copy_n(buf.begin() + static_cast<std::ptrdiff_t>(pos), 4, key.begin());
    pos += 4;
  }
  if (buf.size() < pos + len) return std::nullopt;
  Frame f;
  f.fin = (b0 & 0x80) != 0;
  f.opcode = static_cast<Opcode>(op);
  f.payload.assign(buf.begin() + static_cast<std::ptrdiff_t>(pos),
                   buf.begin() + static_cast<std::ptrdiff_t>(pos + len));
  if (masked) {
    for (std::size_t i = 0; i < f.payload.size(); ++i) f.payload[i] ^= key[i % 4];
  }
  return std::make_pair(std::move(f), pos + static_cast<std::size_t>(len));
}

std::optional<std::string> header_value(std::string_view headers, std::string_view name) {
  auto lower = [](std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
  };
  const std::string want = lower(name);
  std::size_t start = 0;
  while (start < headers.size()) {
    std::size_t end = headers.find("\r\n", start);
    if (end == std::string_view::npos) end = headers.size();
    const std::string_view line = headers.substr(start, end - start);
    const auto colon = line.find(':');
    if (colon != std::string_view::npos && lower(line.substr(0, colon)) == want) {
      std::string_view v = line.substr(colon + 1);
      while (!v.empty() && (v.front() == ' ' || v.front() == '\t')) v.remove_prefix(1);
      while (!v.empty() && (v.back() == ' ' || v.back() == '\t')) v.remove_suffix(1);
      return std::string(v);
    }
    start = end + 2;
  }
  return std::nullopt;
}

}  // namespace teleop::net::ws

#pragma once

#include <cstdint>
#include <string_view>
#include <optional>

#include "teleop/core/bytes.hpp"
#include "teleop/core/clock.hpp"
#include "teleop/simcore/snapshot.hpp"

namespace teleop::media {

// The first byte of every frame message names its payload encoding.
enum class Encoding : std::uint8_t { state_v1 = 1, raster_v1 = 2 };

std::string_view encoding_name(Encoding e);
/// Throws Error(UnsupportedEncoding).
Encoding encoding_from_name(std::string_view name);

inline constexpr int kRasterWidth = 320;
inline constexpr int kRasterHeight = 240;
inline constexpr std::uint8_t kRasterVersion = 1;
inline constexpr std::size_t kFrameHeaderBytes = 1 + 4 + 8;

/// state-v1 payload: the snapshot's fields in declaration order, little-endian.
Bytes encode_state(const simcore::FrameSnapshot& s);
/// Throws Error(CorruptRecord) on truncation or trailing bytes.
simcore::FrameSnapshot decode_state(ByteView payload);

struct RasterImage {
  std::uint32_t env_index = 0;
  std::uint64_t tick = 0;
  std::uint64_t last_cmd_seq = 0;
  int width = kRasterWidth;
  int height = kRasterHeight;
  Bytes rgb;  // row-major, 3 bytes per pixel

  friend bool operator==(const RasterImage&, const RasterImage&) = default;
};

/// Top-down orthographic view of the scene; deterministic.
RasterImage render(const simcore::FrameSnapshot& s);

/// raster-v1 payload: [u8 version][u32 env][u64 tick][u64 last_cmd_seq]
/// [u16 w][u16 h][u32 raw size][zlib stream of the RGB rows].
Bytes encode_raster(const RasterImage& img);
RasterImage decode_raster(ByteView payload);

/// Wire frame: [u8 encoding][u32 env_seq][f64 t_server ms][payload].
struct EncodedFrame {
  Encoding encoding = Encoding::state_v1;
  std::uint32_t env_index = 0;
  std::uint32_t env_seq = 0;
  double t_server_ms = 0.0;
  Bytes payload;

  friend bool operator==(const EncodedFrame&, const EncodedFrame&) = default;
};

EncodedFrame encode(const simcore::FrameSnapshot& s, Encoding e);
Bytes to_wire(const EncodedFrame& f);
/// env_index is recovered from the payload. Throws Error(UnsupportedEncoding)
/// for an unknown encoding byte and Error(CorruptRecord) for truncation.
EncodedFrame from_wire(ByteView wire);

/// Metadata every encoding carries, without decoding pixels.
struct FrameInfo {
  Encoding encoding = Encoding::state_v1;
  std::uint32_t env_index = 0;
  std::uint32_t env_seq = 0;
  double t_server_ms = 0.0;
  std::uint64_t last_cmd_seq = 0;
};
FrameInfo inspect(ByteView wire);

}  // namespace teleop::media

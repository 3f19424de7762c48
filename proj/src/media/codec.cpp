#include "teleop/media/codec.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cmath>

namespace teleop::media {

using simcore::FrameSnapshot;

std::string_view encoding_name(Encoding e) {
  switch (e) {
    case Encoding::state_v1: return "state-v1";
    case Encoding::raster_v1: return "raster-v1";
  }
  return "unknown";
}

Encoding encoding_from_name(std::string_view name) {
  if (name == "state-v1") return Encoding::state_v1;
  if (name == "raster-v1") return Encoding::raster_v1;
  throw Error(ErrorCode::UnsupportedEncoding, "unknown encoding '" + std::string(name) + "'");
}

namespace {

void put_pose(ByteWriter& w, const geometry::Pose& p) {
  w.f64(p.position.x);
  w.f64(p.position.y);
  w.f64(p.position.z);
  w.f64(p.orientation.w);
  w.f64(p.orientation.x);
  w.f64(p.orientation.y);
  w.f64(p.orientation.z);
}

geometry::Vec3 get_vec(ByteReader& r) {
  geometry::Vec3 v;
  v.x = r.f64();
  v.y = r.f64();
  v.z = r.f64();
  return v;
}

geometry::Pose get_pose(ByteReader& r) {
  geometry::Pose p;
  p.position = get_vec(r);
  p.orientation.w = r.f64();
  p.orientation.x = r.f64();
  p.orientation.y = r.f64();
  p.orientation.z = r.f64();
  return p;
}

void put_vec(ByteWriter& w, const geometry::Vec3& v) {
  w.f64(v.x);
  w.f64(v.y);
  w.f64(v.z);
}

void corrupt(const std::string& why) { throw Error(ErrorCode::CorruptRecord, why); }

}  // namespace

Bytes encode_state(const FrameSnapshot& s) {
  Bytes out;
  out.reserve(160 + s.objects.size() * 66);
  ByteWriter w(out);
  w.u8(s.schema);
  w.u32(s.env_index);
  w.u64(s.tick);
  w.f64(s.t_server);
  w.u8(static_cast<std::uint8_t>(s.task));
  w.u8(static_cast<std::uint8_t>(s.status));
  w.u64(s.episode);
  w.u64(s.last_cmd_seq);
  put_pose(w, s.effector);
  w.u8(s.gripper_closed ? 1 : 0);
  w.f64(s.table_z);
  w.u16(static_cast<std::uint16_t>(s.objects.size()));
  for (const auto& o : s.objects) {
    w.u8(o.id);
    w.u8(static_cast<std::uint8_t>(o.shape));
    put_pose(w, o.pose);
    w.f64(o.half_extent);
    w.u8(o.grasped ? 1 : 0);
  }
  w.u8(s.target ? 1 : 0);
  if (s.target) {
    put_pose(w, s.target->pose);
    w.f64(s.target->position_tolerance);
    w.f64(s.target->rotation_tolerance);
    w.u32(s.target->ticks_left);
  }
  w.u8(s.beam ? 1 : 0);
  if (s.beam) {
    put_vec(w, s.beam->start);
    put_vec(w, s.beam->end);
    w.f64(s.beam->thickness);
    w.u8(s.beam->armed ? 1 : 0);
  }
  w.u32(s.targets_done);
  w.u32(s.targets_total);
  w.u32(s.hits);
  w.u32(s.misses);
  w.u64(static_cast<std::uint64_t>(s.reset_count));
  return out;
}

FrameSnapshot decode_state(ByteView payload) {
  ByteReader r(payload);
  FrameSnapshot s;
  s.schema = r.u8();
  if (s.schema != simcore::kSnapshotSchema) corrupt("unsupported snapshot schema " + std::to_string(s.schema));
  s.env_index = r.u32();
  s.tick = r.u64();
  s.t_server = r.f64();
  const auto task = r.u8();
  if (task > static_cast<std::uint8_t>(simcore::TaskId::stack)) corrupt("bad task id");
  s.task = static_cast<simcore::TaskId>(task);
  const auto status = r.u8();
  if (status > static_cast<std::uint8_t>(simcore::EpisodeStatus::reset_pending)) corrupt("bad status");
  s.status = static_cast<simcore::EpisodeStatus>(status);
  s.episode = r.u64();
  s.last_cmd_seq = r.u64();
  s.effector = get_pose(r);
  s.gripper_closed = r.u8() != 0;
  s.table_z = r.f64();
  const std::uint16_t n = r.u16();
  s.objects.resize(n);
  for (auto& o : s.objects) {
    o.id = r.u8();
    const auto shape = r.u8();
    if (shape > static_cast<std::uint8_t>(simcore::Shape::beam_target)) corrupt("bad shape");
    o.shape = static_cast<simcore::Shape>(shape);
    o.pose = get_pose(r);
    o.half_extent = r.f64();
    o.grasped = r.u8() != 0;
  }
  if (r.u8() != 0) {
    simcore::TargetOverlay t;
    t.pose = get_pose(r);
    t.position_tolerance = r.f64();
    t.rotation_tolerance = r.f64();
    t.ticks_left = r.u32();
    s.target = t;
  }
  if (r.u8() != 0) {
    simcore::BeamSegment b;
    b.start = get_vec(r);
    b.end = get_vec(r);
    b.thickness = r.f64();
    b.armed = r.u8() != 0;
    s.beam = b;
  }
  s.targets_done = r.u32();
  s.targets_total = r.u32();
  s.hits = r.u32();
  s.misses = r.u32();
  s.reset_count = static_cast<std::int64_t>(r.u64());
  if (r.remaining() != 0) corrupt("trailing bytes after snapshot");
  return s;
}

// --- software renderer ------------------------------------------------------

namespace {

using Rgb = std::array<std::uint8_t, 3>;

constexpr double kPixelsPerMeter = 120.0;

class Canvas {
 public:
  explicit Canvas(RasterImage& img) : img_(img) {
    img_.rgb.assign(static_cast<std::size_t>(img_.width) * img_.height * 3, 0);
  }

  void set(int x, int y, Rgb c) {
    if (x < 0 || y < 0 || x >= img_.width || y >= img_.height) return;
    const auto i = (static_cast<std::size_t>(y) * img_.width + x) * 3;
    img_.rgb[i] = c[0];
    img_.rgb[i + 1] = c[1];
    img_.rgb[i + 2] = c[2];
  }

  void fill(Rgb c) {
    for (int y = 0; y < img_.height; ++y)
      for (int x = 0; x < img_.width; ++x) set(x, y, c);
  }

  [[nodiscard]] int px(double x) const { return static_cast<int>(std::lround(img_.width / 2.0 + x * kPixelsPerMeter)); }
  [[nodiscard]] int py(double y) const { return static_cast<int>(std::lround(img_.height / 2.0 - y * kPixelsPerMeter)); }

  void rect(double cx, double cy, double half, Rgb c) {
    const int r = std::max(1, static_cast<int>(std::lround(half * kPixelsPerMeter)));
    const int x0 = px(cx), y0 = py(cy);
    for (int y = y0 - r; y <= y0 + r; ++y)
      for (int x = x0 - r; x <= x0 + r; ++x) set(x, y, c);
  }

  void disc(double cx, double cy, int r, Rgb c, bool outline = false) {
    const int x0 = px(cx), y0 = py(cy);
    for (int y = -r; y <= r; ++y) {
      for (int x = -r; x <= r; ++x) {
        const int d2 = x * x + y * y;
        if (d2 > r * r) continue;
        if (outline && d2 < (r - 1) * (r - 1)) continue;
        set(x0 + x, y0 + y, c);
      }
    }
  }

  void line(double ax, double ay, double bx, double by, int half_width, Rgb c) {
    const int x0 = px(ax), y0 = py(ay), x1 = px(bx), y1 = py(by);
    const int steps = std::max({std::abs(x1 - x0), std::abs(y1 - y0), 1});
    for (int i = 0; i <= steps; ++i) {
      const int x = x0 + (x1 - x0) * i / steps;
      const int y = y0 + (y1 - y0) * i / steps;
      for (int dy = -half_width; dy <= half_width; ++dy)
        for (int dx = -half_width; dx <= half_width; ++dx) set(x + dx, y + dy, c);
    }
  }

 private:
  RasterImage& img_;
};

constexpr std::array<Rgb, 4> kObjectColors{{{200, 40, 40}, {40, 80, 200}, {220, 180, 40}, {150, 60, 170}}};

}  // namespace

RasterImage render(const FrameSnapshot& s) {
  RasterImage img;
  img.env_index = s.env_index;
  img.tick = s.tick;
  img.last_cmd_seq = s.last_cmd_seq;
  Canvas c(img);
  c.fill({36, 38, 44});
  for (int i = -4; i <= 4; ++i) {
    const double g = i * 0.25;
    c.line(g, -1.0, g, 1.0, 0, {52, 56, 64});
    c.line(-1.0, g, 1.0, g, 0, {52, 56, 64});
  }
  if (s.beam) {
    const int hw = std::max(0, static_cast<int>(std::lround(s.beam->thickness * kPixelsPerMeter / 2)));
    c.line(s.beam->start.x, s.beam->start.y, s.beam->end.x, s.beam->end.y, hw,
           s.beam->armed ? Rgb{60, 170, 90} : Rgb{90, 110, 130});
  }
  // Lower objects first so stacked cubes show their top.
  std::vector<const simcore::SceneObject*> order;
  for (const auto& o : s.objects) order.push_back(&o);
  std::stable_sort(order.begin(), order.end(),
                   [](const auto* a, const auto* b) { return a->pose.position.z < b->pose.position.z; });
  for (const auto* o : order) {
    const Rgb col = kObjectColors[o->id % kObjectColors.size()];
    if (o->shape == simcore::Shape::sphere) {
      c.disc(o->pose.position.x, o->pose.position.y,
             std::max(1, static_cast<int>(std::lround(o->half_extent * kPixelsPerMeter))), col);
    } else {
      c.rect(o->pose.position.x, o->pose.position.y, o->half_extent, col);
    }
  }
  if (s.target) {
    const int r = std::max(3, static_cast<int>(std::lround(s.target->position_tolerance * kPixelsPerMeter)));
    c.disc(s.target->pose.position.x, s.target->pose.position.y, r, {240, 240, 240}, true);
  }
  const int er = 4 + static_cast<int>(std::lround(std::clamp(s.effector.position.z, 0.0, 1.0) * 6));
  c.disc(s.effector.position.x, s.effector.position.y, er, s.gripper_closed ? Rgb{230, 90, 60} : Rgb{80, 220, 120});
  return img;
}

Bytes encode_raster(const RasterImage& img) {
  if (img.rgb.size() != static_cast<std::size_t>(img.width) * img.height * 3) {
    throw Error(ErrorCode::CorruptRecord, "raster size does not match its dimensions");
  }
  uLongf packed = compressBound(static_cast<uLong>(img.rgb.size()));
  Bytes z(packed);
  if (compress2(z.data(), &packed, img.rgb.data(), static_cast<uLong>(img.rgb.size()), 6) != Z_OK) {
    throw Error(ErrorCode::CorruptRecord, "zlib compression failed");
  }
  z.resize(packed);
  Bytes out;
  ByteWriter w(out);
  w.u8(kRasterVersion);
  w.u32(img.env_index);
  w.u64(img.tick);
  w.u64(img.last_cmd_seq);
  w.u16(static_cast<std::uint16_t>(img.width));
  w.u16(static_cast<std::uint16_t>(img.height));
  w.u32(static_cast<std::uint32_t>(img.rgb.size()));
  w.raw(z);
  return out;
}

RasterImage decode_raster(ByteView payload) {
  ByteReader r(payload);
  if (r.u8() != kRasterVersion) corrupt("unsupported raster version");
  RasterImage img;
  img.env_index = r.u32();
  img.tick = r.u64();
  img.last_cmd_seq = r.u64();
  img.width = r.u16();
  img.height = r.u16();
  const std::uint32_t raw = r.u32();
  if (raw != static_cast<std::uint32_t>(img.width) * img.height * 3) corrupt("raster size mismatch");
  const ByteView z = r.rest();
  img.rgb.resize(raw);
  uLongf len = raw;
  if (uncompress(img.rgb.data(), &len, z.data(), static_cast<uLong>(z.size())) != Z_OK || len != raw) {
    corrupt("raster payload does not inflate");
  }
  return img;
}

// --- wire frames ------------------------------------------------------------

EncodedFrame encode(const FrameSnapshot& s, Encoding e) {
  EncodedFrame f;
  f.encoding = e;
  f.env_index = s.env_index;
  f.env_seq = static_cast<std::uint32_t>(s.tick);
  f.t_server_ms = seconds_to_ms(s.t_server);
  switch (e) {
    case Encoding::state_v1: f.payload = encode_state(s); break;
    case Encoding::raster_v1: f.payload = encode_raster(render(s)); break;
    default: throw Error(ErrorCode::UnsupportedEncoding, "unknown encoding");
  }
  return f;
}

Bytes to_wire(const EncodedFrame& f) {
  Bytes out;
  out.reserve(kFrameHeaderBytes + f.payload.size());
  ByteWriter w(out);
  w.u8(static_cast<std::uint8_t>(f.encoding));
  w.u32(f.env_seq);
  w.f64(f.t_server_ms);
  w.raw(f.payload);
  return out;
}

namespace {

Encoding check_encoding(std::uint8_t b) {
  if (b != static_cast<std::uint8_t>(Encoding::state_v1) && b != static_cast<std::uint8_t>(Encoding::raster_v1)) {
    throw Error(ErrorCode::UnsupportedEncoding, "unknown frame encoding byte " + std::to_string(b));
  }
  return static_cast<Encoding>(b);
}

}  // namespace

EncodedFrame from_wire(ByteView wire) {
  ByteReader r(wire);
  EncodedFrame f;
  f.encoding = check_encoding(r.u8());
  f.env_seq = r.u32();
  f.t_server_ms = r.f64();
  const ByteView p = r.rest();
  f.payload.assign(p.begin(), p.end());
  f.env_index = inspect(wire).env_index;
  return f;
}

FrameInfo inspect(ByteView wire) {
  ByteReader r(wire);
  FrameInfo info;
  info.encoding = check_encoding(r.u8());
  info.env_seq = r.u32();
  info.t_server_ms = r.f64();
  // Both payloads begin with a version byte followed by the env index; the
  // command sequence sits at a fixed offset in each.
  r.u8();
  info.env_index = r.u32();
  if (info.encoding == Encoding::state_v1) {
    r.raw(8 + 8 + 1 + 1 + 8);  // tick, t_server, task, status, episode
  } else {
    r.raw(8);  // tick
  }
  info.last_cmd_seq = r.u64();
  return info;
}

}  // namespace teleop::media

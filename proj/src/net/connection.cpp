#include "teleop/net/connection.hpp"

#include <atomic>
#include <mutex>
#include <random>

#include "teleop/core/errors.hpp"
#include "teleop/net/websocket.hpp"

namespace teleop::net {

namespace {

using Clock = std::chrono::steady_clock;
using std::chrono::milliseconds;

constexpr std::uint8_t kBinaryMarker = 0xFF;
constexpr std::size_t kMaxHandshakeBytes = 16 * 1024;

[[noreturn]] void closed_error(const std::string& why) { throw Error(ErrorCode::ConnectionClosed, why); }

// Socket plus receive buffer and send lock.
class StreamBase : public Connection {
 public:
  StreamBase(Socket socket, Bytes buffered) : socket_(std::move(socket)), buf_(std::move(buffered)) {
    peer_ = socket_.peer_ip();
  }

  void close() override {
    if (!closed_.exchange(true)) socket_.shutdown();
  }
  [[nodiscard]] bool closed() const override { return closed_; }
  [[nodiscard]] const std::string& peer_ip() const override { return peer_; }

  std::optional<Incoming> receive(milliseconds timeout) override {
    const auto deadline = Clock::now() + timeout;
    for (;;) {
      if (closed_) closed_error("connection closed");
      if (auto m = extract()) return m;
      const auto left = std::max(milliseconds(0), std::chrono::duration_cast<milliseconds>(deadline - Clock::now()));
      if (!socket_.wait_readable(left)) return std::nullopt;
      fill();
    }
  }

 protected:
  // Parses one complete message out of buf_, if present.
  virtual std::optional<Incoming> extract() = 0;

  void fill() {
    std::uint8_t chunk[16384];
    std::size_t n = 0;
    try {
      n = socket_.read_some(chunk);
    } catch (const Error&) {
      closed_ = true;
      throw;
    }
    if (n == 0) {
      closed_ = true;
      closed_error("peer closed the connection");
    }
    buf_.insert(buf_.end(), chunk, chunk + n);
  }

  void write(ByteView data) {
    std::lock_guard lock(send_mu_);
    if (closed_) closed_error("connection closed");
    try {
      socket_.write_all(data);
    } catch (const Error&) {
      close();
      throw;
    }
  }

  void consume(std::size_t n) { buf_.erase(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(n)); }

  Socket socket_;
  Bytes buf_;
  std::string peer_;
  std::mutex send_mu_;
  std::atomic<bool> closed_{false};
};

class RawConnection final : public StreamBase {
 public:
  using StreamBase::StreamBase;

  void send_text(std::string_view text) override {
    if (text.find('\n') != std::string_view::npos) throw std::invalid_argument("raw text messages cannot contain newlines");
    Bytes out(text.begin(), text.end());
    out.push_back('\n');
    write(out);
  }

  void send_binary(ByteView data) override {
    Bytes out;
    out.reserve(data.size() + 5);
    ByteWriter w(out);
    w.u8(kBinaryMarker);
    w.u32(static_cast<std::uint32_t>(data.size()));
    w.raw(data);
    write(out);
  }

  [[nodiscard]] bool is_websocket() const override { return false; }

 protected:
  std::optional<Incoming> extract() override {
    if (buf_.empty()) return std::nullopt;
    if (buf_[0] == kBinaryMarker) {
      if (buf_.size() < 5) return std::nullopt;
      ByteReader r(ByteView(buf_).subspan(1, 4));
      const std::size_t len = r.u32();
      if (len > kMaxMessageBytes) throw Error(ErrorCode::MalformedMessage, "binary message too large");
      if (buf_.size() < 5 + len) return std::nullopt;
      Incoming m{MessageKind::binary, Bytes(buf_.begin() + 5, buf_.begin() + 5 + static_cast<std::ptrdiff_t>(len))};
      consume(5 + len);
      return m;
    }
    const auto nl = std::find(buf_.begin(), buf_.end(), '\n');
    if (nl == buf_.end()) {
      if (buf_.size() > kMaxMessageBytes) throw Error(ErrorCode::MalformedMessage, "text line too long");
      return std::nullopt;
    }
    Incoming m{MessageKind::text, Bytes(buf_.begin(), nl)};
    if (!m.data.empty() && m.data.back() == '\r') m.data.pop_back();
    consume(static_cast<std::size_t>(nl - buf_.begin()) + 1);
    return m;
  }
};

class WebSocketConnection final : public StreamBase {
 public:
  WebSocketConnection(Socket socket, Bytes buffered, bool client)
      : StreamBase(std::move(socket), std::move(buffered)), client_(client), rng_(std::random_device{}()) {}

  void send_text(std::string_view text) override {
    send_frame(ws::Opcode::text, ByteView(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  }
  void send_binary(ByteView data) override { send_frame(ws::Opcode::binary, data); }

  void close() override {
    if (!closed_) {
      try {
        send_frame(ws::Opcode::close, {});
      } catch (const Error&) {
      }
    }
    StreamBase::close();
  }

  [[nodiscard]] bool is_websocket() const override { return true; }

 protected:
  std::optional<Incoming> extract() override {
    for (;;) {
      auto parsed = ws::parse_frame(buf_, kMaxMessageBytes);
      if (!parsed) return std::nullopt;
      auto [frame, used] = std::move(*parsed);
      consume(used);
      switch (frame.opcode) {
        case ws::Opcode::ping:
          send_frame(ws::Opcode::pong, frame.payload);
          continue;
        case ws::Opcode::pong:
          continue;
        case ws::Opcode::close:
          try {
            send_frame(ws::Opcode::close, {});
          } catch (const Error&) {
          }
          StreamBase::close();
          closed_error("peer sent close");
        case ws::Opcode::continuation:
          if (!partial_) throw Error(ErrorCode::MalformedMessage, "continuation without a start frame");
          partial_->data.insert(partial_->data.end(), frame.payload.begin(), frame.payload.end());
          if (partial_->data.size() > kMaxMessageBytes) throw Error(ErrorCode::MalformedMessage, "message too large");
          if (frame.fin) {
            Incoming m = std::move(*partial_);
            partial_.reset();
            return m;
          }
          continue;
        case ws::Opcode::text:
        case ws::Opcode::binary: {
          if (partial_) throw Error(ErrorCode::MalformedMessage, "interleaved data frames");
          Incoming m{frame.opcode == ws::Opcode::text ? MessageKind::text : MessageKind::binary,
                     std::move(frame.payload)};
          if (frame.fin) return m;
          partial_ = std::move(m);
          continue;
        }
      }
    }
  }

 private:
  void send_frame(ws::Opcode op, ByteView payload) {
    std::optional<std::array<std::uint8_t, 4>> mask;
    if (client_) {
      std::lock_guard lock(rng_mu_);
      const auto r = static_cast<std::uint32_t>(rng_());
      mask = std::array<std::uint8_t, 4>{static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(r >> 8),
                                         static_cast<std::uint8_t>(r >> 16), static_cast<std::uint8_t>(r >> 24)};
    }
    write(ws::encode_frame(op, payload, true, mask));
  }

  const bool client_;
  std::optional<Incoming> partial_;
  std::mutex rng_mu_;
  std::mt19937 rng_;
};

// Reads until the buffer holds "\r\n\r\n"; returns the header block length.
std::size_t read_http_head(Socket& s, Bytes& buf, Clock::time_point deadline) {
  static constexpr std::string_view kEnd = "\r\n\r\n";
  for (;;) {
    const auto it = std::search(buf.begin(), buf.end(), kEnd.begin(), kEnd.end());
    if (it != buf.end()) return static_cast<std::size_t>(it - buf.begin()) + kEnd.size();
    if (buf.size() > kMaxHandshakeBytes) closed_error("http header too large");
    const auto left = std::chrono::duration_cast<milliseconds>(deadline - Clock::now());
    if (left.count() <= 0 || !s.wait_readable(left)) closed_error("handshake timed out");
    std::uint8_t chunk[4096];
    const std::size_t n = s.read_some(chunk);
    if (n == 0) closed_error("peer closed during handshake");
    buf.insert(buf.end(), chunk, chunk + n);
  }
}

std::string random_key() {
  std::random_device rd;
  std::array<std::uint8_t, 16> raw{};
  for (auto& b : raw) b = static_cast<std::uint8_t>(rd());
  return ws::base64(raw);
}

}  // namespace

std::unique_ptr<Connection> accept_connection(Socket socket, milliseconds timeout) {
  const auto deadline = Clock::now() + timeout;
  Bytes buf;
  // Enough bytes to tell "GET " from a raw message.
  while (buf.size() < 4) {
    if (!buf.empty() && (buf[0] == kBinaryMarker || std::find(buf.begin(), buf.end(), '\n') != buf.end())) break;
    const auto left = std::chrono::duration_cast<milliseconds>(deadline - Clock::now());
    if (left.count() <= 0 || !socket.wait_readable(left)) closed_error("no data from peer");
    std::uint8_t chunk[4096];
    const std::size_t n = socket.read_some(chunk);
    if (n == 0) closed_error("peer closed before sending");
    buf.insert(buf.end(), chunk, chunk + n);
  }
  static constexpr std::string_view kGet = "GET ";
  if (buf.size() < 4 || !std::equal(kGet.begin(), kGet.end(), buf.begin())) {
    return std::make_unique<RawConnection>(std::move(socket), std::move(buf));
  }
  const std::size_t head = read_http_head(socket, buf, deadline);
  const std::string headers(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(head));
  const auto key = ws::header_value(headers, "Sec-WebSocket-Key");
  const auto upgrade = ws::header_value(headers, "Upgrade");
  if (!key || !upgrade) {
    const std::string reply = "HTTP/1.1 400 Bad Request\r\nContent-Length: 0\r\nConnection: close\r\n\r\n";
    try {
      socket.write_all(to_bytes(reply));
    } catch (const Error&) {
    }
    closed_error("http request without websocket upgrade");
  }
  const std::string reply =
      "HTTP/1.1 101 Switching Protocols\r\nUpgrade: websocket\r\nConnection: Upgrade\r\nSec-WebSocket-Accept: " +
      ws::accept_key(*key) + "\r\n\r\n";
  socket.write_all(to_bytes(reply));
  buf.erase(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(head));
  return std::make_unique<WebSocketConnection>(std::move(socket), std::move(buf), false);
}

std::unique_ptr<Connection> dial(const Endpoint& to, const DialOptions& options) {
  Socket socket = Socket::connect(to, options.bind_ip, options.timeout);
  if (!options.websocket) return std::make_unique<RawConnection>(std::move(socket), Bytes{});
  const std::string key = random_key();
  const std::string request = "GET " + options.path + " HTTP/1.1\r\nHost: " + to.str() +
                              "\r\nUpgrade: websocket\r\nConnection: Upgrade\r\nSec-WebSocket-Key: " + key +
                              "\r\nSec-WebSocket-Version: 13\r\n\r\n";
  socket.write_all(to_bytes(request));
  Bytes buf;
  const std::size_t head = read_http_head(socket, buf, Clock::now() + options.timeout);
  const std::string headers(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(head));
  if (headers.rfind("HTTP/1.1 101", 0) != 0) closed_error("websocket upgrade refused");
  const auto accept = ws::header_value(headers, "Sec-WebSocket-Accept");
  if (!accept || *accept != ws::accept_key(key)) closed_error("bad Sec-WebSocket-Accept");
  buf.erase(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(head));
  return std::make_unique<WebSocketConnection>(std::move(socket), std::move(buf), true);
}

}  // namespace teleop::net

#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>

#include "teleop/media/codec.hpp"
#include "teleop/simcore/env_batch.hpp"
#include "teleop/statestore/state_store.hpp"

namespace teleop::media {

/// Encodes one frame for every assigned environment and writes it to that
/// environment's ring. Returns the number of ring writes.
std::size_t pump(statestore::StateStore& store, const simcore::EnvBatch& batch, Encoding encoding);

/// Destination of a display stream. send() throws Error(ConnectionClosed)
/// once the peer is gone.
class FrameSink {
 public:
  virtual ~FrameSink() = default;
  virtual void send(const Bytes& frame) = 0;
};

struct StreamStats {
  std::uint64_t sent = 0;
  std::uint64_t skipped = 0;  // ring frames never delivered because a newer one existed
};

/// Delivers the newest ring frame whenever one newer than the last delivered
/// exists, until `stop` is set, the ring closes, or the sink fails. Nothing is
/// queued: a slow sink simply skips to the latest frame. `on_wake` runs after
/// every wait, with or without a frame.
StreamStats stream(const statestore::FrameRing& ring, FrameSink& sink, const std::atomic<bool>& stop,
                   const std::function<void()>& on_wake = {},
                   std::chrono::milliseconds poll = std::chrono::milliseconds(100));

}  // namespace teleop::media

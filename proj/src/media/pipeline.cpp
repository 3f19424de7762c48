#include "teleop/media/pipeline.hpp"

namespace teleop::media {

std::size_t pump(statestore::StateStore& store, const simcore::EnvBatch& batch, Encoding encoding) {
  std::size_t writes = 0;
  for (const std::uint32_t env : batch.assigned_envs()) {
    store.ring_put(statestore::frame_ring_name(env), to_wire(encode(batch.snapshot(env), encoding)));
    ++writes;
  }
  return writes;
}

StreamStats stream(const statestore::FrameRing& ring, FrameSink& sink, const std::atomic<bool>& stop,
                   const std::function<void()>& on_wake, std::chrono::milliseconds poll) {
  StreamStats stats;
  std::uint64_t last = 0;
  if (auto cur = ring.latest()) last = cur->seq - 1;  // deliver the current frame first
  try {
    while (!stop.load()) {
      const auto entry = ring.wait_newer(last, poll);
      if (stop.load()) break;
      if (entry) {
        if (last != 0 && entry->seq > last + 1) stats.skipped += entry->seq - last - 1;
        last = entry->seq;
        sink.send(*entry->frame);
        ++stats.sent;
      }
      if (on_wake) on_wake();
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ConnectionClosed) throw;
  }
  return stats;
}

}  // namespace teleop::media

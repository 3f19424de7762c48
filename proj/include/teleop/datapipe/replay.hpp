#pragma once

#include "teleop/core/record.hpp"
#include "teleop/simcore/env_batch.hpp"

namespace teleop::datapipe {

/// Feeds the record's accepted commands and reset requests into `batch` at
/// their logged ticks and checks every post-step effector pose and gripper
/// state bit for bit. The batch must be fresh and built from the record's
/// task, size and seed. Throws DivergenceError carrying the first mismatching
/// tick.
simcore::EnvState replay(const DemonstrationRecord& rec, simcore::EnvBatch& batch);

/// Builds the batch from the record header.
simcore::EnvState replay(const DemonstrationRecord& rec);

}  // namespace teleop::datapipe

#pragma once

#include <cstdint>

#include "teleop/core/record.hpp"
#include "teleop/simcore/task.hpp"

namespace teleop::simcore {

struct CurriculumScore {
  double position_error = 0.0;  // m, mean over targets
  double rotation_error = 0.0;  // rad, mean over targets
  std::uint32_t hits = 0;
  std::uint32_t targets = 0;
};

/// Scores a calibration or evaluation demo from the target events it logged.
/// Errors are measured between the logged effector pose and the target at
/// each acquisition instant (hit or expiry). Components the task does not
/// check are reported as 0. Throws Error(WrongTask) for manipulation tasks or
/// when the record belongs to another task.
CurriculumScore score_curriculum(const DemonstrationRecord& record, const TaskParams& task);

}  // namespace teleop::simcore

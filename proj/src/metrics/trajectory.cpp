#include "teleop/metrics/trajectory.hpp"

#include <cmath>

#include "teleop/core/errors.hpp"

namespace teleop::metrics {

void validate(TrajectoryView traj) {
  if (traj.empty()) throw Error(ErrorCode::TooShort, "trajectory has no samples");
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (std::abs(geometry::norm(traj[i].pose.orientation) - 1.0) > 1e-9) {
      throw Error(ErrorCode::CorruptRecord, "non-unit orientation at sample " + std::to_string(i));
    }
    if (i > 0 && !(traj[i].t > traj[i - 1].t)) {
      throw Error(ErrorCode::CorruptRecord, "stamps not strictly increasing at sample " + std::to_string(i));
    }
  }
}

}  // namespace teleop::metrics

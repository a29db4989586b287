#include "hjbverify/trajectory.hpp"

#include "hjbverify/errors.hpp"

#include <algorithm>
#include <ostream>

namespace hjbv {

Vec Trajectory::state_at(double t) const {
  if (times.empty()) throw PreconditionError("empty trajectory");
  if (t < times.front() || t > times.back()) {
    throw DomainError("trajectory queried outside its time span");
  }
  auto it = std::lower_bound(times.begin(), times.end(), t);
  std::size_t k = static_cast<std::size_t>(it - times.begin());
  if (it != times.end() && *it == t) return states[k];
  std::size_t i = k - 1;
  const double h = times[i + 1] - times[i];
  const double s = (t - times[i]) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1;
  const double h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2;
  const double h11 = s3 - s2;
  return h00 * states[i] + (h10 * h) * slope_start[i] + h01 * states[i + 1] +
         (h11 * h) * slope_end[i];
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const int n = traj.states.empty() ? 0 : static_cast<int>(traj.states.front().size());
  const int q = traj.control.values().empty() ? 0 : traj.control.control_dim();
  os << "t";
  for (int i = 0; i < n; ++i) os << ",x" << (i + 1);
  for (int j = 0; j < q; ++j) os << ",u" << (j + 1);
  os << "\n";
  os.precision(17);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double t = traj.times[k];
    os << t;
    for (int i = 0; i < n; ++i) os << "," << traj.states[k][i];
    if (q > 0) {
      const Vec& u = (k == 0 || t <= traj.control.start()) ? traj.control.values().front()
                                                           : traj.control(t);
      for (int j = 0; j < q; ++j) os << "," << u[j];
    }
    os << "\n";
  }
}

}  // namespace hjbv

#pragma once

#include "hjbverify/control.hpp"
#include "hjbverify/types.hpp"

#include <iosfwd>
#include <vector>

namespace hjbv {

// Sampled solution of x' = f(t, x, u(t)). Between samples the state is the
// cubic Hermite interpolant built from the slopes at both ends of each step.
struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> states;
  std::vector<Vec> slope_start;  // f at the start of step i (size times-1)
  std::vector<Vec> slope_end;    // f at the end of step i, same control
  std::vector<double> cost;      // running cost integral from times[0]; may be empty
  PiecewiseConstantControl control;
  bool exited_domain = false;
  double exit_time = kInf;

  std::size_t size() const { return times.size(); }
  double start() const { return times.front(); }
  double end() const { return times.back(); }
  const Vec& final_state() const { return states.back(); }

  // Stored state at sample times, Hermite interpolation in between.
  Vec state_at(double t) const;
};

// Rows t, x1..xn, u1..uq. The control column at times[0] repeats the first
// piece's value.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

}  // namespace hjbv

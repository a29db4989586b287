#pragma once

#include "hjbverify/control.hpp"
#include "hjbverify/grid.hpp"
#include "hjbverify/integrate.hpp"
#include "hjbverify/problem.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

namespace hjbv {

// Estimated value on a grid, +inf where the target was not reached.
struct ValueGrid : GridField {
  std::vector<Vec> controls;          // control samples used
  std::vector<std::int32_t> policy;   // minimizing control index, -1 if none
  std::size_t boundary_losses = 0;    // (x, u) pairs whose foot left the box
  double capture_radius = 0.0;
  std::size_t sweeps = 0;             // value iteration only
  bool converged = true;
};

// CSV rows t, x1..xn, V.
void write_value_csv(std::ostream& os, const GridField& field);

// Binary dump, little-endian throughout:
//   char[8]  magic "HJBVGRID"
//   uint32   version (1)
//   uint32   number of axes A (time axis first, then x1 .. xn)
//   A times  { float64 lo, float64 hi, uint64 count }
//   uint64   number of values N
//   N times  float64 value, row-major (time slowest, xn fastest)
void write_value_binary(std::ostream& os, const GridField& field);
GridField read_value_binary(std::istream& is);

struct BruteForceOptions {
  std::size_t pieces = 3;
  std::size_t control_samples = 2;
  double horizon = 1.0;  // final time T of the enumerated controls
  double step = 0.0;     // RK4 step, 0 selects (T - t0) / 2000
  double capture_radius = 1e-9;
  std::size_t max_pieces = 6;
  std::size_t max_controls = 15625;
};

struct BruteForceResult {
  double value = kInf;
  std::optional<PiecewiseConstantControl> best;
  BolzaOutcome outcome;
  std::size_t evaluated = 0;
  std::size_t hitting = 0;
  double horizon = 0.0;
};

// Throws SizeGuardError with a size report when k^m is too large.
void check_brute_force_size(std::size_t pieces, std::size_t controls, std::size_t max_pieces,
                            std::size_t max_controls);

BruteForceResult brute_force_value(const ControlProblem& problem, double t0, const Vec& x0,
                                   const BruteForceOptions& options);

// Minimum of brute_force_value over several final times.
BruteForceResult brute_force_value_scan(const ControlProblem& problem, double t0, const Vec& x0,
                                        BruteForceOptions options,
                                        const std::vector<double>& horizons);

struct DpOptions {
  std::size_t control_samples = 2;
  double capture_radius = 0.0;  // 0 selects half the grid mesh
};

// Backward semi-Lagrangian induction on a finite-horizon grid.
ValueGrid dp_value_grid(const ControlProblem& problem, const GridSpec& grid,
                        const DpOptions& options = {});

// One backward step at (t, x) from the next layer. Returns the minimum over
// `controls`; argmin and boundary-loss count are reported when requested.
double dp_backup(const ControlProblem& problem, const GridSpec& grid, const double* next_layer,
                 double t, const Vec& x, double dt, const std::vector<Vec>& controls,
                 std::int32_t* argmin = nullptr, std::size_t* losses = nullptr);

struct ValueIterationOptions {
  std::size_t control_samples = 2;
  double dt = 0.0;              // 0 selects four state meshes
  double capture_radius = 0.0;  // 0 selects one cell diagonal
  double cap_value = 30.0;      // finite stand-in for +inf; values >= cap are reported +inf
  std::size_t max_sweeps = 5000;
  double tol = 1e-10;
  double time = 0.0;            // frozen time for the autonomous data
};

// Autonomous fixed point T(x) = min_u [dt L + Interp T(x + dt f)] on a
// single-layer grid, by Gauss-Seidel sweeps in alternating orders. Feet are
// RK4 steps; a step that reaches the target is charged its exact arrival
// cost instead of an interpolated value.
ValueGrid value_iteration(const ControlProblem& problem, const GridSpec& space_grid,
                          const ValueIterationOptions& options = {});

using Feedback = std::function<Vec(double, const Vec&)>;

struct SynthesisOptions {
  double step = 1e-3;
  double cutoff = 1e-4;     // chattering cutoff: stop when distance to S <= cutoff
  double max_time = 100.0;  // time budget after t0
  double switch_tol = 1e-12;
};

struct SynthesisResult {
  double value = kInf;
  double running_cost = 0.0;
  double final_cost = 0.0;
  bool converged = false;
  double end_time = 0.0;
  Vec end_state;
  std::vector<double> switch_times;
  double sliding_time = 0.0;  // time spent on a sliding surface
  std::size_t steps = 0;
};

// Closed-loop RK4 with the feedback sampled at each step start; a change of
// feedback value inside a step is located by bisection and becomes a step
// boundary. When both controls at a switch push the state back across, the
// state slides along the switching surface under the equivalent control (a
// convex combination of the two, so U should be convex there).
SynthesisResult value_from_synthesis(const ControlProblem& problem, const Feedback& feedback,
                                     double t0, const Vec& x0,
                                     const SynthesisOptions& options = {});

}  // namespace hjbv

#pragma once

#include "hjbverify/control.hpp"
#include "hjbverify/problem.hpp"
#include "hjbverify/trajectory.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace hjbv {

// One classical RK4 step with the control frozen at u.
Vec rk4_step(const ControlProblem& problem, double t, const Vec& x, const Vec& u, double h);

// Simpson rule for int L over one step from (t, x) to x_end, with the
// midpoint state from an RK4 half step.
double simpson_step_cost(const ControlProblem& problem, double t, const Vec& x, const Vec& x_end,
                         const Vec& u, double h);

// Step boundaries on [t0, tf]: every control breakpoint inside the span is a
// boundary, and each piece is cut into equal steps no longer than h.
std::vector<double> step_schedule(const PiecewiseConstantControl& control, double t0, double tf,
                                  double h);

struct IntegrateOptions {
  bool accumulate_cost = false;
  bool stop_on_domain_exit = true;
  double dist_tol = 1e-9;
};

// Fixed-step RK4 aligned with the control breakpoints. step <= 0 selects
// (tf - t0) / 2000.
Trajectory integrate(const ControlProblem& problem, const PiecewiseConstantControl& control,
                     double t0, const Vec& x0, double tf, double step = 0.0,
                     IntegrateOptions options = {});

// Bolza cost along one control, stopped at the first target hit.
struct HitOptions {
  double capture_radius = 1e-9;  // hit when distance to S <= capture_radius
  int subsamples = 4;            // per-step probes for grazing approaches
};

struct BolzaOutcome {
  bool hit = false;
  double hit_time = kInf;
  Vec hit_state;
  double running_cost = 0.0;
  double final_cost = 0.0;
  double total = kInf;  // +inf without a hit
  bool exited_domain = false;
  double end_time = 0.0;  // last integrated time (hit time when hit)
  Vec end_state;
};

BolzaOutcome bolza_cost(const ControlProblem& problem, const PiecewiseConstantControl& control,
                        double t0, const Vec& x0, double t_end, double step,
                        const HitOptions& hit = {});

// Per-cell L^p projection of a sampled control onto a left-continuous step
// function on `grid`, projected to the nearest sampled point of U.
PiecewiseConstantControl approximate_control(const std::vector<std::pair<double, Vec>>& samples,
                                             const std::vector<double>& grid, double p,
                                             const ControlSetSpec& control_set,
                                             std::size_t control_samples = 201);

struct DependenceRow {
  double scale = 0.0;
  double perturbation = 0.0;  // |dx0| + ||du||_{L^p}
  double sup_distance = 0.0;
  bool exited = false;
};

std::vector<DependenceRow> continuous_dependence_probe(
    const ControlProblem& problem, const PiecewiseConstantControl& control, double t0,
    const Vec& x0, double tf, const std::vector<double>& scales, double step = 0.0,
    std::uint64_t seed = 1);

// Internal helper shared with the closed-loop integrator: the first s in
// (0, h] at which the step from (t, x) under u comes within `capture` of
// the target, using end-point, sub-sample and grazing searches.
std::optional<double> first_hit_in_step(const ControlProblem& problem, double t, const Vec& x,
                                        const Vec& x1, const Vec& u, double h,
                                        const HitOptions& hit);

}  // namespace hjbv

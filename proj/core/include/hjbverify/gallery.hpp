#pragma once

#include "hjbverify/candidate.hpp"
#include "hjbverify/problem.hpp"
#include "hjbverify/value.hpp"
#include "hjbverify/verify.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hjbv {

using GalleryParams = std::map<std::string, double>;

// A family of controls indexed by a budget, for divergence probes.
struct DivergenceConfig {
  double t0 = 0.0;
  Vec x0;
  std::function<PiecewiseConstantControl(double)> family;
  std::vector<double> budgets;
  double step = 1e-2;
};

struct GalleryEntry {
  std::string name;
  ControlProblem problem;
  CandidateValueFunction candidate;
  std::optional<Feedback> synthesis;
  SynthesisOptions synthesis_options;
  Theorem theorem = Theorem::teo1;
  // Expected verdict per hypothesis record id.
  std::map<std::string, Verdict> expected;
  std::vector<std::string> notes;

  // Verification defaults.
  Box window;
  double mesh = 1.0 / 64.0;
  double dt = 0.0;  // time step of the check grid, 0 uses mesh
  std::optional<Box> omega_window;
  HypothesisCheckSpec check_defaults;  // grid fields filled by check_spec()

  // Infinite-horizon defaults.
  std::vector<double> horizons;
  std::vector<InfiniteHorizonProbe> probes;

  // Value estimation defaults.
  BruteForceOptions brute;
  double brute_duration = 1.0;  // horizon = t0 + brute_duration
  // When non-empty, scan horizons t0 + f * base, where base is the closed-loop
  // time of the synthesis from the start (brute_duration without one).
  std::vector<double> brute_horizon_factors;
  DpOptions dp;
  bool autonomous = false;  // value iteration instead of backward induction
  ValueIterationOptions vi;
  double value_mesh = 1.0 / 64.0;

  // Comparison defaults. The estimate V^ is the minimum over the listed
  // methods ("brute", "dp", "synthesis", "rollout").
  std::vector<std::string> compare_methods{"brute"};
  double compare_slack = 1e-6;
  double compare_rel_slack = 0.0;  // added slack per unit |V^|
  // Open-loop control used by "rollout" from a start time, and its duration.
  std::function<PiecewiseConstantControl(double)> rollout;
  double rollout_duration = 0.0;
  std::function<bool(double, const Vec&)> compare_filter;  // accepted sample points
  std::optional<DivergenceConfig> divergence;

  GalleryParams params;

  // Spec with grids built from window, mesh and dt.
  HypothesisCheckSpec check_spec() const;
  // Spec for an explicit mesh (and dt, 0 keeps the entry's ratio).
  HypothesisCheckSpec check_spec(double mesh, double dt) const;
};

GalleryEntry gallery_oscillator(const GalleryParams& params = {});
GalleryEntry gallery_sin_one_over_x(const GalleryParams& params = {});
GalleryEntry gallery_fuller(const GalleryParams& params = {});
GalleryEntry gallery_counterexample_L(const GalleryParams& params = {});
GalleryEntry gallery_infinite_decay(const GalleryParams& params = {});

std::vector<std::string> gallery_names();
// Throws DomainError for an unknown name or parameter.
GalleryEntry gallery_entry(const std::string& name, const GalleryParams& params = {});

// Harmonic oscillator, minimum time to the origin.
ControlProblem oscillator_problem();
// Bang-bang feedback switching on the semicircle locus.
Vec oscillator_feedback(const Vec& x);
// Closed-loop time of the feedback computed arc by arc (no time stepping).
double oscillator_arc_time(const Vec& x);
// Semicircle switching locus and the tangency arcs, clipped to |x1| <= reach.
RectifiableSet oscillator_exceptional_set(double reach);

// sin(1/x) problem and its closed-form value.
ControlProblem sin1x_problem(double x_min);
double sin1x_value(double t, double x);

// Double integrator with L = x1^2.
ControlProblem fuller_problem();
Vec fuller_feedback(double c, const Vec& x);

struct FullerScan {
  std::vector<double> c;
  std::vector<double> cost;
  std::size_t argmin = 0;
  double best_c = 0.0;     // refined inside the bracket around argmin
  double best_cost = 0.0;
};

// Closed-loop cost from (1, 0) for each c of a uniform scan.
FullerScan fuller_scan(double lo = 0.3, double hi = 0.6, std::size_t count = 200,
                       const SynthesisOptions& options = {});
// The default scan, computed once.
const FullerScan& fuller_default_scan();
// Closed-loop cost from x with coefficient c.
SynthesisResult fuller_synthesis(double c, const Vec& x, const SynthesisOptions& options = {});
// Candidate built from the scaling V(l^2 x1, l x2) = l^5 V(x1, x2) and a
// tabulated profile on the unit curve x1^2 + x2^4 = 1.
CandidateValueFunction fuller_candidate(double c, double offset = 0.0);

}  // namespace hjbv

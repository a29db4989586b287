#pragma once

#include "hjbverify/candidate.hpp"
#include "hjbverify/control.hpp"
#include "hjbverify/grid.hpp"
#include "hjbverify/integrate.hpp"
#include "hjbverify/problem.hpp"
#include "hjbverify/trajectory.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace hjbv {

enum class Theorem { teo1, teo2, corollary_eps };
enum class BoundaryMode { strict_levelset, remark_liminf };
enum class Verdict { pass, fail, skipped };

const char* to_string(Theorem t);
const char* to_string(Verdict v);
const char* to_string(BoundaryMode m);

struct HypothesisCheckSpec {
  Theorem theorem = Theorem::teo1;
  GridSpec grid;                 // sampling grid for Q
  std::optional<GridSpec> omega_grid;  // grid over Omega for hypothesis v (default: grid)
  double exclusion_radius = 0.0; // rho_A, 0 selects 2 x grid mesh
  int refinement = -1;           // distance refinement, -1 uses the set's default
  double hjb_tol = 1e-6;
  double target_tol = 1e-9;
  double boundary_tol = 1e-6;
  double ndj_tol = 1e-3;
  double liminf_tol = 1e-2;
  std::size_t control_samples = 21;
  BoundaryMode boundary_mode = BoundaryMode::strict_levelset;
  bool check_all = false;  // also run iii and v when Q = Omega

  // Corollary mode: thresholds relaxed by eps * g(t).
  double eps = 0.0;
  std::function<double(double)> g;  // default g = 1
  double g_l1 = 1.0;

  // Hypothesis i budgets.
  std::size_t ndj_trajectories = 40;
  std::size_t ndj_steps = 400;
  double ndj_span = 0.0;  // trajectory duration, 0 selects the window's time span
  std::vector<double> ndj_offsets{1e-2, 1e-3, 1e-4};
  std::size_t liminf_points = 200;
  std::vector<double> liminf_annuli{1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  std::size_t liminf_samples = 200;
  double liminf_quantile = 0.0;

  std::size_t target_samples = 2000;
  std::size_t boundary_samples = 2000;
  std::uint64_t seed = 1;
  Tolerances tol;
  bool keep_residuals = true;
};

struct HypothesisRecord {
  std::string id;
  std::string description;
  Verdict verdict = Verdict::pass;
  double worst_violation = 0.0;  // > tolerance means fail
  double tolerance = 0.0;
  std::optional<Point> witness;
  std::optional<Vec> witness_control;
  double witness_value = 0.0;  // the checked quantity at the witness
  std::size_t points_checked = 0;
  std::size_t points_excluded = 0;
  std::string note;
};

struct VerificationReport {
  Theorem theorem = Theorem::teo1;
  std::string problem;
  std::vector<HypothesisRecord> hypotheses;
  Tolerances tolerances;
  HypothesisCheckSpec spec;  // tolerances and grid used
  std::uint64_t seed = 0;
  double wall_ms = 0.0;
  bool window_limited = false;
  bool conclusion = false;
  std::string resolution_note;
  std::optional<GridField> residuals;  // HJB residual per grid point, NaN when excluded

  const HypothesisRecord* find(const std::string& id) const;
  // Pass iff every non-skipped record passes.
  bool recompute_conclusion();
};

// W_s + min over the sampled controls of [W_y . f + L]. Empty when the point
// lies within rho_A of the exceptional set.
std::optional<double> hjb_residual(const CandidateValueFunction& W, const ControlProblem& problem,
                                   double t, const Vec& x, const std::vector<Vec>& controls,
                                   double exclusion_radius, const Tolerances& tol = {},
                                   int refinement = -1);
std::optional<double> hjb_residual(const CandidateValueFunction& W, const ControlProblem& problem,
                                   double t, const Vec& x, std::size_t control_samples,
                                   double exclusion_radius, const Tolerances& tol = {},
                                   int refinement = -1);

VerificationReport check_hypotheses(const CandidateValueFunction& W, const ControlProblem& problem,
                                    const HypothesisCheckSpec& spec);

struct NdjResult {
  double worst = 0.0;  // max over t of min over h of W(t-h, g(t-h)) - W(t, g(t))
  std::optional<double> witness_time;
  std::size_t checked = 0;
  std::size_t skipped = 0;
};

NdjResult check_ndj(const CandidateValueFunction& W, const Trajectory& trajectory,
                    const std::vector<double>& offsets);
// Integrates the constant control first.
NdjResult check_ndj(const CandidateValueFunction& W, const ControlProblem& problem,
                    const Vec& omega, double t0, const Vec& x0, double tf, std::size_t steps,
                    const std::vector<double>& offsets);

struct LiminfResult {
  bool pass = true;
  double proxy = kInf;  // min over annuli of the q-quantile
  double value = 0.0;   // W(t, x)
  double coverage = 1.0;
  std::string warning;
};

// Annulus sampling surrogate for ess-liminf_{y -> x} W(t, y) <= W(t, x).
// `admissible` restricts samples to W's domain (resampled otherwise).
LiminfResult check_ess_liminf(const CandidateValueFunction& W, double t, const Vec& x,
                              const std::vector<double>& annuli, std::size_t samples,
                              double quantile, double liminf_tol, std::uint64_t seed = 1,
                              const std::function<bool(double, const Vec&)>& admissible = {});

struct MonotoneResult {
  double worst = 0.0;  // max over steps of phi(t_i) - phi(t_{i+1})
  std::optional<double> witness_time;
  std::size_t steps = 0;
  bool exited = false;
};

// phi(t) = W(t, x(t)) + int_{t0}^t L, checked on the step grid up to any
// exit from Q.
MonotoneResult check_monotone_cost(const CandidateValueFunction& W, const ControlProblem& problem,
                                   const PiecewiseConstantControl& control, double t0,
                                   const Vec& x0, double tf, double step);

struct Certificate {
  bool certified = false;
  double bound = 0.0;
  std::string text;
};

// eps (1 + ||g||_1) bound for a report produced in corollary mode.
Certificate corollary_eps_bound(const VerificationReport& report, double eps, double g_l1);

struct InfiniteHorizonProbe {
  Point start;
  PiecewiseConstantControl control;
};

struct TailRecord {
  std::vector<double> horizons;
  std::vector<double> W_values;
  std::vector<double> psi_values;
  bool inconclusive = false;
  double margin = 0.0;  // max tail W - max tail psi
};

VerificationReport check_infinite_horizon(const CandidateValueFunction& W,
                                          const ControlProblem& problem,
                                          const HypothesisCheckSpec& spec,
                                          const std::vector<double>& horizons,
                                          const std::vector<InfiniteHorizonProbe>& probes,
                                          std::vector<TailRecord>* tails = nullptr);

using StartSampler = std::function<Vec(std::mt19937_64&)>;

struct TubeRow {
  double delta = 0.0;
  double mean_fraction = 0.0;
};

// Mean fraction of [t0, t1] that constant-control trajectories from random
// starts spend within delta of A.
std::vector<TubeRow> crossing_tube_statistic(const RectifiableSet& A, const ControlProblem& problem,
                                             const Vec& omega, const StartSampler& starts,
                                             double t0, double t1,
                                             const std::vector<double>& deltas,
                                             std::size_t trials, std::uint64_t seed = 1,
                                             std::size_t steps = 2000);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

enum class EnvelopeMode { lower, upper };

// Discrete semicontinuous envelopes on a uniform grid: lower is the
// morphological opening (min then max over the 3^d neighbourhood), upper the
// closing. Radii below one cell fall back to the one-cell neighbourhood.
GridField envelope(const GridField& field, EnvelopeMode mode,
                   const std::vector<double>& radii = {});

struct DppResult {
  double residual = 0.0;  // W(t0, x0) - min [int L + W(T1, x(T1))]
  double best = kInf;
  std::size_t searched = 0;
  std::size_t dropped = 0;
};

DppResult dpp_residual(const CandidateValueFunction& W, const ControlProblem& problem, double t0,
                       const Vec& x0, double T1, std::size_t pieces, std::size_t control_samples,
                       double step = 0.0);

struct DivergenceRow {
  double budget = 0.0;
  double cost = kInf;
  bool hit = false;
};

// Bolza costs of a control family indexed by a budget (e.g. a dwell time).
// Costs that keep decreasing as the budget grows indicate V = -inf.
std::vector<DivergenceRow> divergence_probe(
    const ControlProblem& problem, double t0, const Vec& x0,
    const std::function<PiecewiseConstantControl(double)>& family,
    const std::vector<double>& budgets, double step = 1e-2);

}  // namespace hjbv

#include "hjbverify/gallery.hpp"

#include "hjbverify/errors.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <set>

namespace hjbv {

namespace {

constexpr double kPi = std::numbers::pi;

Box make_box(double t_lo, double t_hi, std::initializer_list<double> lo,
             std::initializer_list<double> hi) {
  Box b;
  b.t_lo = t_lo;
  b.t_hi = t_hi;
  b.x_lo = vec(lo);
  b.x_hi = vec(hi);
  return b;
}

// Reads known parameters, rejecting unknown keys.
class Params {
 public:
  Params(const GalleryParams& p, const std::string& entry, std::set<std::string> extra)
      : p_(p) {
    std::set<std::string> known{"mesh", "dt", "candidate_offset"};
    known.insert(extra.begin(), extra.end());
    for (const auto& [k, v] : p) {
      if (!known.count(k)) throw DomainError("unknown parameter '" + k + "' for " + entry);
    }
  }
  double get(const std::string& key, double fallback) const {
    auto it = p_.find(key);
    return it == p_.end() ? fallback : it->second;
  }

 private:
  const GalleryParams& p_;
};

void apply_common(GalleryEntry& e, const Params& p) {
  e.mesh = p.get("mesh", e.mesh);
  e.dt = p.get("dt", e.dt);
  const double off = p.get("candidate_offset", 0.0);
  if (off != 0.0) {
    e.candidate = e.candidate.shifted(off);
    e.notes.push_back("candidate shifted by " + std::to_string(off));
  }
}

std::map<std::string, Verdict> all_pass(std::initializer_list<const char*> ids) {
  std::map<std::string, Verdict> m;
  for (const char* id : ids) m[id] = Verdict::pass;
  return m;
}

}  // namespace

HypothesisCheckSpec GalleryEntry::check_spec() const { return check_spec(mesh, dt); }

HypothesisCheckSpec GalleryEntry::check_spec(double m, double d) const {
  HypothesisCheckSpec s = check_defaults;
  if (d <= 0.0) d = dt > 0.0 ? dt * m / mesh : m;
  s.grid = GridSpec::from_window(window, m, d);
  if (omega_window) s.omega_grid = GridSpec::from_window(*omega_window, m, d);
  if (s.exclusion_radius <= 0.0) s.exclusion_radius = 2.0 * s.grid.state_mesh();
  return s;
}

// sin(1/x) ------------------------------------------------------------------

double sin1x_value(double t, double x) {
  if (t >= 1.0) return 0.0;
  if (x != 0.0) {
    const double s = std::sin(1.0 / x);
    return t <= s ? s - t : 1.0 - t;
  }
  return t <= -1.0 ? -1.0 - t : 0.0;
}

ControlProblem sin1x_problem(double x_min) {
  ControlProblem p;
  p.name = "sin1x";
  p.dim = 1;
  p.dynamics = [](double, const Vec&, const Vec&) { return scalar_vec(0.0); };
  p.running_cost = [](double, const Vec&, const Vec&) { return 1.0; };
  p.final_cost = [](double, const Vec&) { return 0.0; };
  SetSpec S;
  S.label = "graph of sin(1/x), the segment x = 0, and t >= 1";
  S.contains = [](double t, const Vec& x) {
    if (t >= 1.0) return true;
    if (x[0] == 0.0) return std::abs(t) <= 1.0;
    return std::abs(t - std::sin(1.0 / x[0])) <= 1e-12;
  };
  S.distance = [](double t, const Vec& x) {
    double d = std::max(0.0, 1.0 - t);
    d = std::min(d, std::hypot(x[0], std::max(0.0, std::abs(t) - 1.0)));
    if (x[0] != 0.0) d = std::min(d, std::abs(t - std::sin(1.0 / x[0])));
    return d;
  };
  S.nearest = [](double t, const Vec& x) {
    if (t >= 1.0) return Point{t, x};
    if (x[0] == 0.0) return Point{std::clamp(t, -1.0, 1.0), x};
    const double s = std::sin(1.0 / x[0]);
    return std::abs(t - s) <= 1.0 - t ? Point{s, x} : Point{1.0, x};
  };
  S.sampler = [x_min](const Box& w, std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Point> out;
    const double xl = w.x_lo[0], xh = w.x_hi[0];
    for (std::size_t i = 0; i < count; ++i) {
      double x = xl + (xh - xl) * unit(rng);
      Point p;
      switch (i % 3) {
        case 0:
          if (std::abs(x) < x_min) continue;
          p = {std::sin(1.0 / x), scalar_vec(x)};
          break;
        case 1: {
          if (xl > 0.0 || xh < 0.0) continue;
          const double lo = std::max(-1.0, w.t_lo), hi = std::min(1.0, w.t_hi);
          if (lo > hi) continue;
          p = {lo + (hi - lo) * unit(rng), scalar_vec(0.0)};
          break;
        }
        default: {
          const double lo = std::max(1.0, w.t_lo);
          if (lo > w.t_hi) continue;
          p = {lo + (w.t_hi - lo) * unit(rng), scalar_vec(x)};
        }
      }
      if (p.t >= w.t_lo && p.t <= w.t_hi) out.push_back(p);
    }
    return out;
  };
  p.target = S;
  p.domain = SetSpec::everything(1);
  p.verification_domain = SetSpec::everything(1);
  p.verification_is_domain = true;
  p.control_set = ControlSetSpec::interval(-1.0, 1.0);
  p.control_norm_exponent = 1.0;
  return p;
}

GalleryEntry gallery_sin_one_over_x(const GalleryParams& params) {
  Params p(params, "sin1x", {});
  const double x_min = 1.0 / (40.0 * kPi);
  GalleryEntry e;
  e.name = "sin1x";
  e.problem = sin1x_problem(x_min);
  e.window = make_box(-2.0, 2.0, {-1.0}, {1.0});
  e.mesh = 1.0 / 256.0;
  e.value_mesh = 1.0 / 256.0;

  std::vector<ManifoldPiece> pieces;
  auto axis_piece = ManifoldPiece::segment("x = 0", vec({-3.0, 0.0}), vec({3.0, 0.0}), false);
  axis_piece.inflate = x_min;
  pieces.push_back(axis_piece);
  pieces.push_back(ManifoldPiece::segment("t = 1", vec({1.0, -1.5}), vec({1.0, 1.5}), false));
  for (double side : {1.0, -1.0}) {
    ManifoldPiece g;
    g.label = side > 0.0 ? "graph x > 0" : "graph x < 0";
    g.param_lo = scalar_vec(1.0);
    g.param_hi = scalar_vec(1.0 / x_min);
    g.embed = [side](const Vec& th) { return vec({side * std::sin(th[0]), side / th[0]}); };
    g.base_cells = 4096;
    pieces.push_back(std::move(g));
  }
  auto grad = [](double t, const Vec& x) {
    Gradient g;
    g.wy = scalar_vec(0.0);
    if (t >= 1.0) return g;
    g.ws = -1.0;
    if (x[0] != 0.0) {
      const double s = std::sin(1.0 / x[0]);
      if (t <= s) g.wy[0] = -std::cos(1.0 / x[0]) / (x[0] * x[0]);
    } else if (t > -1.0) {
      g.ws = 0.0;
    }
    return g;
  };
  e.candidate = CandidateValueFunction(
      "closed-form value", [](double t, const Vec& x) { return sin1x_value(t, x[0]); }, grad,
      RectifiableSet(1, std::move(pieces)));
  e.theorem = Theorem::teo1;
  e.check_defaults.check_all = true;
  e.expected = all_pass({"i.ndj", "i.ess_liminf", "ii", "iii", "iv", "v"});
  e.notes = {"f = 0, L = 1, psi = 0: the value is the waiting time until the target",
             "candidate is the exact value, discontinuous on the graph and on x = 0",
             "expected: every hypothesis holds although W is not continuous"};
  e.brute.pieces = 1;
  e.brute.control_samples = 2;
  e.brute.capture_radius = 1e-12;
  e.brute_duration = 3.5;
  e.dp.capture_radius = 0.0;
  e.compare_methods = {"brute"};
  e.compare_slack = 1e-9;
  e.compare_filter = [](double t, const Vec& x) {
    return std::abs(x[0]) >= 0.05 && std::abs(t - std::sin(1.0 / x[0])) >= 0.02 &&
           std::abs(t - 1.0) >= 0.02;
  };
  apply_common(e, p);
  return e;
}

// Oscillator ------------------------------------------------------------------

GalleryEntry gallery_oscillator(const GalleryParams& params) {
  Params p(params, "oscillator", {});
  GalleryEntry e;
  e.name = "oscillator";
  e.problem = oscillator_problem();
  e.window = make_box(0.0, 4.0 * kPi, {-4.0, -4.0}, {4.0, 4.0});
  e.mesh = 1.0 / 64.0;
  e.dt = kPi;  // autonomous data, a few time layers suffice
  e.candidate = CandidateValueFunction(
      "closed-loop time of the semicircle switching feedback",
      [](double, const Vec& x) { return oscillator_arc_time(x); }, {},
      oscillator_exceptional_set(4.0));
  e.synthesis = [](double, const Vec& x) { return oscillator_feedback(x); };
  e.synthesis_options.step = 1e-3;
  e.synthesis_options.cutoff = 1e-4;
  e.theorem = Theorem::teo1;
  e.check_defaults.hjb_tol = 1e-2;
  e.check_defaults.check_all = true;
  e.expected = all_pass({"i.ndj", "i.ess_liminf", "ii", "iii", "iv", "v"});
  e.notes = {"minimum time to the origin for x1' = x2, x2' = -x1 + u, |u| <= 1",
             "switching on unit semicircles about (2k+1, 0) below the axis and about "
             "-(2k+1, 0) above it",
             "exceptional set: the switching semicircles and the tangency arcs through (2k, 0)"};
  e.brute.pieces = 3;
  e.brute.control_samples = 2;
  e.brute.capture_radius = 1e-2;
  e.brute_duration = 4.0;
  e.autonomous = true;
  e.vi.control_samples = 2;
  e.value_mesh = 1.0 / 128.0;
  e.compare_methods = {"brute", "dp"};
  e.compare_slack = 5e-2;
  apply_common(e, p);
  return e;
}

// Fuller ------------------------------------------------------------------------

GalleryEntry gallery_fuller(const GalleryParams& params) {
  Params p(params, "fuller", {"c"});
  GalleryEntry e;
  e.name = "fuller";
  e.problem = fuller_problem();
  const double c = p.get("c", fuller_default_scan().best_c);
  e.params["c"] = c;
  e.window = make_box(0.0, 6.0, {-2.0, -2.0}, {2.0, 2.0});
  e.mesh = 1.0 / 32.0;
  e.dt = 3.0;
  e.candidate = fuller_candidate(c);
  e.synthesis = [c](double, const Vec& x) { return fuller_feedback(c, x); };
  e.synthesis_options.step = 1e-3;
  e.synthesis_options.cutoff = 1e-4;
  e.theorem = Theorem::teo1;
  e.check_defaults.hjb_tol = 1e-2;
  e.check_defaults.ndj_tol = 1e-2;
  e.check_defaults.check_all = true;
  e.expected = all_pass({"i.ndj", "i.ess_liminf", "ii", "iii", "iv", "v"});
  e.notes = {"x1' = x2, x2' = u, L = x1^2, target the origin",
             "switching curve x1 = -c sign(x2) x2^2 with c from a cost scan from (1, 0)",
             "candidate: closed-loop cost, extended from the unit curve by scaling"};
  e.brute.pieces = 4;
  e.brute.control_samples = 2;
  e.brute.capture_radius = 1e-2;
  e.brute_duration = 3.0;
  // Equal-piece controls reach the origin only at isolated horizons, so the
  // scan must be finer than the capture radius allows the end state to drift.
  for (int i = 0; i <= 300; ++i) e.brute_horizon_factors.push_back(0.5 + 0.005 * i);
  e.compare_methods = {"brute"};
  e.compare_slack = 1e-3;
  e.compare_rel_slack = 2e-2;
  apply_common(e, p);
  return e;
}

// Counterexample with a sign-changing Lagrangian ---------------------------------

GalleryEntry gallery_counterexample_L(const GalleryParams& params) {
  Params p(params, "counterexample_L", {"C"});
  const double C = p.get("C", -1.0);
  GalleryEntry e;
  e.name = "counterexample_L";
  e.params["C"] = C;
  ControlProblem& pr = e.problem;
  pr.name = "counterexample_L";
  pr.dim = 1;
  pr.dynamics = [](double, const Vec&, const Vec& u) { return scalar_vec(u[0]); };
  pr.running_cost = [](double, const Vec& x, const Vec& u) {
    const double y = x[0];
    return u[0] * u[0] + y * y * y * y - 6.0 * y * y * y + 7.0 * y * y;
  };
  pr.final_cost = [](double, const Vec&) { return 0.0; };
  pr.target = SetSpec::state_ball(scalar_vec(0.0), 0.0);
  pr.domain = SetSpec::everything(1);
  pr.verification_domain = SetSpec::open_slab(1, 0, -1.0, 1.0);
  pr.control_set = ControlSetSpec::interval(-1.0, 1.0);
  pr.control_norm_exponent = 2.0;
  e.candidate = CandidateValueFunction(
      "constant", [C](double, const Vec&) { return C; },
      [](double, const Vec&) { return Gradient{0.0, scalar_vec(0.0)}; }, RectifiableSet());
  e.window = make_box(0.0, 1.0, {-1.0}, {1.0});
  e.omega_window = make_box(0.0, 1.0, {-2.0}, {6.0});
  e.mesh = 1.0 / 64.0;
  e.theorem = Theorem::teo1;
  e.expected = all_pass({"i.ndj", "i.ess_liminf", "ii", "iii", "iv"});
  e.expected["v"] = Verdict::fail;
  e.notes = {"x' = u, |u| <= 1, Q = R x (-1, 1), W constant negative",
             "L = u^2 + x^4 - 6x^3 + 7x^2 is positive on Q but negative for 2 < x < 5",
             "expected: every hypothesis but v holds, and the value is unbounded below"};
  DivergenceConfig d;
  d.t0 = 0.0;
  d.x0 = scalar_vec(0.5);
  d.family = [](double dwell) {
    // Out to x = 2.5, wait, and come back past the origin.
    return PiecewiseConstantControl({0.0, 2.0, 2.0 + dwell + 1e-12, 2.0 + dwell + 1e-12 + 2.6},
                                    {scalar_vec(1.0), scalar_vec(0.0), scalar_vec(-1.0)});
  };
  d.budgets = {1.0, 10.0, 30.0, 100.0};
  d.step = 1e-2;
  e.divergence = d;
  e.brute.pieces = 3;
  e.brute.control_samples = 3;
  e.brute.capture_radius = 1e-6;
  e.brute_duration = 3.0;
  e.compare_methods = {"brute"};
  e.compare_slack = 1e-6;
  apply_common(e, p);
  return e;
}

// Infinite-horizon decay -----------------------------------------------------------

GalleryEntry gallery_infinite_decay(const GalleryParams& params) {
  Params p(params, "infinite_decay", {"eta"});
  const double eta = p.get("eta", 0.5);
  GalleryEntry e;
  e.name = "infinite_decay";
  e.params["eta"] = eta;
  ControlProblem& pr = e.problem;
  pr.name = "infinite_decay";
  pr.dim = 1;
  pr.dynamics = [](double, const Vec& x, const Vec& u) { return scalar_vec(-u[0] * x[0]); };
  pr.running_cost = [](double, const Vec& x, const Vec& u) { return u[0] * x[0] * x[0]; };
  pr.final_cost = [](double, const Vec& x) { return 0.5 * x[0] * x[0]; };
  pr.target = SetSpec::state_ball(scalar_vec(0.0), 0.0, 0.0);
  pr.domain = SetSpec::everything(1);
  pr.verification_domain = SetSpec::everything(1);
  pr.verification_is_domain = true;
  pr.control_set = ControlSetSpec::interval(0.0, 1.0);
  pr.control_norm_exponent = 1.0;
  pr.horizon_mode = HorizonMode::infinite;
  pr.target_neighborhood = SetSpec::open_state_ball(scalar_vec(0.0), eta);
  e.candidate = CandidateValueFunction(
      "x^2 / 2", [](double, const Vec& x) { return 0.5 * x[0] * x[0]; },
      [](double, const Vec& x) { return Gradient{0.0, scalar_vec(x[0])}; }, RectifiableSet());
  e.window = make_box(0.0, 10.0, {-1.0}, {1.0});
  e.mesh = 1.0 / 64.0;
  e.theorem = Theorem::teo2;
  e.check_defaults.check_all = true;
  e.expected = all_pass({"i.ndj", "i.ess_liminf", "ii", "iii", "iv", "v", "star", "tail"});
  e.notes = {"x' = -u x, 0 <= u <= 1, L = u x^2, the origin reached only as t grows",
             "every control with infinite integral costs x0^2 / 2",
             "expected: every infinite-horizon check holds"};
  for (int j = 1; j <= 10; ++j) e.horizons.push_back(2.0 * j);
  const double T = e.horizons.back();
  std::vector<Vec> alternating;
  for (int k = 0; k < static_cast<int>(T); ++k) alternating.push_back(scalar_vec(k % 2 ? 0.25 : 1.0));
  e.probes = {
      {{0.0, scalar_vec(0.4)}, PiecewiseConstantControl::constant(0.0, T, scalar_vec(1.0))},
      {{0.0, scalar_vec(-0.8)}, PiecewiseConstantControl::constant(0.0, T, scalar_vec(0.5))},
      {{0.0, scalar_vec(0.95)}, PiecewiseConstantControl::uniform(0.0, T, alternating)},
  };
  e.rollout = [](double t0) { return PiecewiseConstantControl::constant(t0, t0 + 40.0, scalar_vec(1.0)); };
  e.rollout_duration = 40.0;
  e.compare_methods = {"rollout"};
  e.compare_slack = 1e-6;
  apply_common(e, p);
  return e;
}

// Registry --------------------------------------------------------------------------

std::vector<std::string> gallery_names() {
  return {"oscillator", "sin1x", "fuller", "counterexample_L", "infinite_decay"};
}

GalleryEntry gallery_entry(const std::string& name, const GalleryParams& params) {
  if (name == "oscillator") return gallery_oscillator(params);
  if (name == "sin1x") return gallery_sin_one_over_x(params);
  if (name == "fuller") return gallery_fuller(params);
  if (name == "counterexample_L") return gallery_counterexample_L(params);
  if (name == "infinite_decay") return gallery_infinite_decay(params);
  throw DomainError("unknown problem '" + name + "'");
}

}  // namespace hjbv

#include "hjbverify/verify.hpp"

#include "hjbverify/errors.hpp"
#include "hjbverify/parallel.hpp"
#include "hjbverify/value.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

namespace hjbv {

const char* to_string(Theorem t) {
  switch (t) {
    case Theorem::teo1: return "teo1";
    case Theorem::teo2: return "teo2";
    case Theorem::corollary_eps: return "eps";
  }
  return "?";
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::skipped: return "skipped";
  }
  return "?";
}

const char* to_string(BoundaryMode m) {
  return m == BoundaryMode::strict_levelset ? "strict_levelset" : "remark_liminf";
}

const HypothesisRecord* VerificationReport::find(const std::string& id) const {
  for (const auto& h : hypotheses) {
    if (h.id == id) return &h;
  }
  return nullptr;
}

bool VerificationReport::recompute_conclusion() {
  conclusion = std::all_of(hypotheses.begin(), hypotheses.end(),
                           [](const HypothesisRecord& h) { return h.verdict != Verdict::fail; });
  resolution_note = conclusion ? "no violation found at the checked resolution"
                               : "violation witnessed";
  return conclusion;
}

std::optional<double> hjb_residual(const CandidateValueFunction& W, const ControlProblem& problem,
                                   double t, const Vec& x, const std::vector<Vec>& controls,
                                   double exclusion_radius, const Tolerances& tol,
                                   int refinement) {
  const RectifiableSet& A = W.exceptional_set();
  if (!A.empty()) {
    const int r = refinement < 0 ? A.default_refinement() : refinement;
    if (A.distance(t, x, r) <= exclusion_radius) return std::nullopt;
  }
  if (W(t, x) == kInf) return kInf;
  const Gradient g = W.gradient(t, x, tol.h_grad);
  double best = kInf;
  for (const Vec& u : controls) {
    best = std::min(best, g.wy.dot(problem.f(t, x, u)) + problem.L(t, x, u));
  }
  return g.ws + best;
}

std::optional<double> hjb_residual(const CandidateValueFunction& W, const ControlProblem& problem,
                                   double t, const Vec& x, std::size_t control_samples,
                                   double exclusion_radius, const Tolerances& tol,
                                   int refinement) {
  return hjb_residual(W, problem, t, x, problem.control_set.sample(control_samples),
                      exclusion_radius, tol, refinement);
}

namespace {

// Records the largest violation; the first index wins ties.
struct Worst {
  double value = -kInf;
  std::optional<Point> where;
  std::optional<Vec> control;
  double quantity = 0.0;

  void offer(double v, const Point& p, double q, const Vec* u = nullptr) {
    if (v > value) {
      value = v;
      where = p;
      quantity = q;
      if (u) control = *u;
    }
  }
};

HypothesisRecord make_record(std::string id, std::string description, const Worst& w, double tol,
                             std::size_t checked, std::size_t excluded) {
  HypothesisRecord r;
  r.id = std::move(id);
  r.description = std::move(description);
  r.tolerance = tol;
  r.points_checked = checked;
  r.points_excluded = excluded;
  r.worst_violation = checked > 0 && std::isfinite(w.value) ? w.value : (w.value == kInf ? kInf : 0.0);
  r.witness = w.where;
  r.witness_control = w.control;
  r.witness_value = w.quantity;
  r.verdict = r.worst_violation > tol ? Verdict::fail : Verdict::pass;
  if (r.verdict == Verdict::pass && !w.where) r.witness.reset();
  return r;
}

HypothesisRecord skipped_record(std::string id, std::string description, std::string note) {
  HypothesisRecord r;
  r.id = std::move(id);
  r.description = std::move(description);
  r.verdict = Verdict::skipped;
  r.note = std::move(note);
  return r;
}

double g_of(const HypothesisCheckSpec& spec, double t) { return spec.g ? spec.g(t) : 1.0; }

double eps_of(const HypothesisCheckSpec& spec) {
  return spec.theorem == Theorem::corollary_eps ? spec.eps : 0.0;
}

// Grid nodes of `grid` within `radius` (sup norm) of p.
template <class F>
void for_nodes_near(const GridSpec& grid, const Point& p, double radius, F&& f) {
  auto range = [&](const Axis& a, double v, std::size_t& lo, std::size_t& hi) {
    if (a.count == 1) {
      lo = hi = 0;
      return;
    }
    const double s = a.step();
    const double l = std::ceil((v - radius - a.lo) / s);
    const double h = std::floor((v + radius - a.lo) / s);
    lo = static_cast<std::size_t>(std::clamp(l, 0.0, static_cast<double>(a.count - 1)));
    hi = static_cast<std::size_t>(std::clamp(h, 0.0, static_cast<double>(a.count - 1)));
  };
  std::size_t tlo, thi;
  range(grid.time, p.t, tlo, thi);
  const std::size_t n = grid.space.size();
  std::vector<std::size_t> lo(n), hi(n), c(n);
  for (std::size_t k = 0; k < n; ++k) range(grid.space[k], p.x[static_cast<Eigen::Index>(k)], lo[k], hi[k]);
  for (std::size_t it = tlo; it <= thi; ++it) {
    c = lo;
    while (true) {
      f(it, grid.layer_index(c));
      std::size_t k = n;
      while (k-- > 0) {
        if (c[k] < hi[k]) {
          ++c[k];
          break;
        }
        c[k] = lo[k];
      }
      if (k == static_cast<std::size_t>(-1)) break;
    }
  }
}

void check_hypothesis_i(const CandidateValueFunction& W, const ControlProblem& pr,
                        const HypothesisCheckSpec& spec, const std::vector<Vec>& controls,
                        VerificationReport& rep) {
  const Box window = spec.grid.window();
  auto inQ = [&](double t, const Vec& x) {
    return pr.verification_is_domain || pr.verification_domain.contains(t, x) ||
           pr.verification_domain.distance(t, x) <= spec.tol.dist_tol;
  };

  // NDJ along constant-control flows.
  const double span =
      spec.ndj_span > 0.0 ? spec.ndj_span : std::max(window.t_hi - window.t_lo, 1.0);
  auto starts = uniform_points(window, spec.ndj_trajectories, spec.seed + 11);
  struct NdjOut {
    NdjResult r;
    Point start;
    Vec omega;
  };
  std::vector<NdjOut> outs(starts.size());
  parallel_for(starts.size(), [&](std::size_t i) {
    const Point& s = starts[i];
    const Vec& omega = controls[i % controls.size()];
    outs[i].start = s;
    outs[i].omega = omega;
    if (!inQ(s.t, s.x) || !pr.domain.contains(s.t, s.x)) return;
    auto control = PiecewiseConstantControl::constant(s.t, s.t + span, omega);
    Trajectory tr = integrate(pr, control, s.t, s.x, s.t + span,
                              span / static_cast<double>(spec.ndj_steps));
    std::size_t keep = tr.size();
    for (std::size_t k = 0; k < tr.size(); ++k) {
      if (!inQ(tr.times[k], tr.states[k])) {
        keep = k;
        break;
      }
    }
    if (keep < 2) return;
    tr.times.resize(keep);
    tr.states.resize(keep);
    tr.slope_start.resize(keep - 1);
    tr.slope_end.resize(keep - 1);
    outs[i].r = check_ndj(W, tr, spec.ndj_offsets);
  });
  Worst ndj;
  std::size_t ndj_checked = 0;
  std::size_t ndj_skipped = 0;
  for (const auto& o : outs) {
    ndj_checked += o.r.checked;
    ndj_skipped += o.r.skipped;
    if (o.r.witness_time) {
      Point p{*o.r.witness_time, o.start.x};
      ndj.offer(o.r.worst, p, o.r.worst, &o.omega);
    }
  }
  auto ndj_rec = make_record("i.ndj", "no downward jumps along constant-control flows", ndj,
                             spec.ndj_tol, ndj_checked, ndj_skipped);
  if (ndj_rec.witness) ndj_rec.note = "witness t is the jump time; x is the flow start";
  rep.hypotheses.push_back(ndj_rec);

  // ess-liminf at grid nodes and near the exceptional set.
  std::mt19937_64 rng(spec.seed + 13);
  std::vector<Point> pts;
  std::uniform_int_distribution<std::size_t> pick(0, spec.grid.size() - 1);
  for (std::size_t i = 0; i < spec.liminf_points; ++i) pts.push_back(spec.grid.point(pick(rng)));
  const RectifiableSet& A = W.exceptional_set();
  if (!A.empty()) {
    std::vector<Point> near_a;
    for (const Point& p : A.lattice_points(0)) {
      if (window.contains(std::isnan(p.t) ? window.t_lo : p.t, p.x)) near_a.push_back(p);
    }
    // Cylinder pieces carry no time; draw one from the window.
    std::uniform_real_distribution<double> ut(window.t_lo, window.t_hi);
    const std::size_t want = near_a.empty() ? 0 : spec.liminf_points / 2;
    for (std::size_t i = 0; i < want; ++i) {
      Point p = near_a[(i * 7919) % near_a.size()];
      if (std::isnan(p.t)) p.t = ut(rng);
      pts.push_back(p);
    }
  }
  std::vector<LiminfResult> lres(pts.size());
  parallel_for(pts.size(), [&](std::size_t i) {
    if (!inQ(pts[i].t, pts[i].x)) {
      lres[i].coverage = -1.0;
      return;
    }
    lres[i] = check_ess_liminf(W, pts[i].t, pts[i].x, spec.liminf_annuli, spec.liminf_samples,
                               spec.liminf_quantile, spec.liminf_tol, spec.seed + 17 + i, inQ);
  });
  Worst lim;
  std::size_t lim_checked = 0;
  std::size_t lim_skipped = 0;
  std::string warnings;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (lres[i].coverage < 0.0) {
      ++lim_skipped;
      continue;
    }
    ++lim_checked;
    const double v = lres[i].proxy - lres[i].value;
    lim.offer(std::isnan(v) ? -kInf : v, pts[i], lres[i].proxy);
    if (!lres[i].warning.empty() && warnings.empty()) warnings = lres[i].warning;
  }
  auto lim_rec = make_record("i.ess_liminf", "ess-liminf in space does not exceed W", lim,
                             spec.liminf_tol, lim_checked, lim_skipped);
  lim_rec.note = warnings;
  rep.hypotheses.push_back(lim_rec);
}

}  // namespace

VerificationReport check_hypotheses(const CandidateValueFunction& W, const ControlProblem& pr,
                                    const HypothesisCheckSpec& spec) {
  const auto started = std::chrono::steady_clock::now();
  VerificationReport rep;
  rep.theorem = spec.theorem;
  rep.problem = pr.name;
  rep.tolerances = spec.tol;
  rep.spec = spec;
  rep.seed = spec.seed;
  rep.window_limited = true;

  const GridSpec& grid = spec.grid;
  const Box window = grid.window();
  const auto controls = pr.control_set.sample(spec.control_samples);
  const double rho = spec.exclusion_radius > 0.0 ? spec.exclusion_radius : 2.0 * grid.mesh();
  const double eps = eps_of(spec);
  const bool q_is_omega = pr.verification_is_domain;

  // Hypothesis i.
  check_hypothesis_i(W, pr, spec, controls, rep);

  // Hypothesis iv over the grid, and W over Q for the sup used by iii.
  const std::size_t N = grid.size();
  std::vector<double> resid(N, std::nan(""));
  std::vector<double> wv(N, std::nan(""));
  std::vector<char> state(N, 0);  // 0 outside Q, 1 checked, 2 excluded
  parallel_for(N, [&](std::size_t k) {
    const Point p = grid.point(k);
    if (!q_is_omega && !pr.verification_domain.contains(p.t, p.x)) return;
    wv[k] = W(p.t, p.x);
    auto r = hjb_residual(W, pr, p.t, p.x, controls, rho, spec.tol, spec.refinement);
    if (!r) {
      state[k] = 2;
      return;
    }
    state[k] = 1;
    resid[k] = *r;
  });
  Worst iv;
  std::size_t iv_checked = 0;
  std::size_t iv_excluded = 0;
  double sup_grid = -kInf;
  for (std::size_t k = 0; k < N; ++k) {
    if (state[k] == 0) continue;
    if (std::isfinite(wv[k])) sup_grid = std::max(sup_grid, wv[k]);
    if (state[k] == 2) {
      ++iv_excluded;
      continue;
    }
    ++iv_checked;
    const Point p = grid.point(k);
    double v = std::isnan(resid[k]) ? kInf : -resid[k] - eps * g_of(spec, p.t);
    iv.offer(v, p, resid[k]);
  }
  auto iv_rec = make_record("iv", "HJB inequality on Q minus A", iv, spec.hjb_tol, iv_checked,
                            iv_excluded);
  {
    std::ostringstream os;
    os << "exclusion radius " << rho << ", " << controls.size() << " control samples";
    iv_rec.note = os.str();
  }

  // Hypothesis ii: W <= psi on sampled S (plus grid nodes on S).
  {
    auto pts = pr.target.sample(window, spec.target_samples, spec.seed + 3);
    for (std::size_t k = 0; k < N; ++k) {
      const Point p = grid.point(k);
      if (pr.target.contains(p.t, p.x)) pts.push_back(p);
    }
    Worst ii;
    for (const Point& p : pts) {
      const double w = W(p.t, p.x);
      const double v = w - pr.psi(p.t, p.x) - eps;
      ii.offer(std::isnan(v) ? kInf : v, p, w);
    }
    rep.hypotheses.push_back(
        make_record("ii", "W <= psi on the target", ii, spec.target_tol, pts.size(), 0));
  }

  // Hypothesis iii: boundary of Q is the sup level set.
  if (q_is_omega && !spec.check_all) {
    rep.hypotheses.push_back(skipped_record("iii", "boundary of Q is a level set at sup W",
                                            "dropped: Q equals the domain"));
  } else {
    auto bpts = pr.verification_domain.sample(window, spec.boundary_samples, spec.seed + 5);
    Worst iii;
    for (const Point& b : bpts) {
      if (spec.boundary_mode == BoundaryMode::strict_levelset) {
        const double w = W(b.t, b.x);
        iii.offer(std::abs(w - sup_grid), b, w);
      } else {
        double proxy = kInf;
        for (double r : {1.0, 2.0, 4.0}) {
          double m = kInf;
          bool any = false;
          for_nodes_near(grid, b, r * grid.mesh(), [&](std::size_t it, std::size_t li) {
            const std::size_t k = grid.flat(it, li);
            if (state[k] == 0) return;
            any = true;
            m = std::min(m, wv[k]);
          });
          if (any) {
            proxy = m;
            break;
          }
        }
        iii.offer(sup_grid - proxy, b, proxy);
      }
    }
    auto rec = make_record("iii", "boundary of Q is a level set at sup W", iii, spec.boundary_tol,
                           bpts.size(), 0);
    rec.note = std::string("mode ") + to_string(spec.boundary_mode) + "; window-limited";
    if (bpts.empty()) rec.note += "; boundary of Q does not meet the window";
    rep.hypotheses.push_back(rec);
  }

  rep.hypotheses.push_back(iv_rec);

  // Hypothesis v: L >= 0 on the Omega grid.
  if (q_is_omega && !spec.check_all) {
    rep.hypotheses.push_back(
        skipped_record("v", "running cost is non-negative", "dropped: Q equals the domain"));
  } else {
    const GridSpec& og = spec.omega_grid ? *spec.omega_grid : grid;
    const std::size_t M = og.size();
    std::vector<double> worst(M, -kInf);
    std::vector<double> lval(M, 0.0);
    std::vector<std::int32_t> arg(M, -1);
    std::vector<char> in(M, 0);
    parallel_for(M, [&](std::size_t k) {
      const Point p = og.point(k);
      if (!pr.domain.whole_space && !pr.domain.contains(p.t, p.x)) return;
      in[k] = 1;
      for (std::size_t j = 0; j < controls.size(); ++j) {
        const double L = pr.L(p.t, p.x, controls[j]);
        const double v = -L - eps * g_of(spec, p.t);
        if (v > worst[k]) {
          worst[k] = v;
          lval[k] = L;
          arg[k] = static_cast<std::int32_t>(j);
        }
      }
    });
    Worst v;
    std::size_t checked = 0;
    for (std::size_t k = 0; k < M; ++k) {
      if (!in[k]) continue;
      ++checked;
      v.offer(worst[k], og.point(k), lval[k],
              arg[k] >= 0 ? &controls[static_cast<std::size_t>(arg[k])] : nullptr);
    }
    auto rec = make_record("v", "running cost is non-negative", v, spec.hjb_tol,
                           checked * controls.size(), 0);
    rec.note = "checked on the domain grid";
    rep.hypotheses.push_back(rec);
  }

  if (spec.keep_residuals) {
    GridField res(grid, std::nan(""));
    res.values = std::move(resid);
    rep.residuals = std::move(res);
  }
  rep.recompute_conclusion();
  rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  return rep;
}

NdjResult check_ndj(const CandidateValueFunction& W, const Trajectory& tr,
                    const std::vector<double>& offsets) {
  NdjResult res;
  res.worst = -kInf;
  if (offsets.empty()) throw PreconditionError("NDJ needs at least one offset");
  const double hmax = *std::max_element(offsets.begin(), offsets.end());
  for (std::size_t k = 0; k < tr.size(); ++k) {
    const double t = tr.times[k];
    if (t - hmax < tr.start()) {
      ++res.skipped;
      continue;
    }
    const double now = W(t, tr.states[k]);
    if (now == kInf) {
      ++res.checked;
      continue;
    }
    double best = kInf;
    for (double h : offsets) best = std::min(best, W(t - h, tr.state_at(t - h)) - now);
    ++res.checked;
    if (best > res.worst) {
      res.worst = best;
      res.witness_time = t;
    }
  }
  if (res.checked == 0) res.worst = 0.0;
  return res;
}

NdjResult check_ndj(const CandidateValueFunction& W, const ControlProblem& problem,
                    const Vec& omega, double t0, const Vec& x0, double tf, std::size_t steps,
                    const std::vector<double>& offsets) {
  auto control = PiecewiseConstantControl::constant(t0, tf, omega);
  Trajectory tr = integrate(problem, control, t0, x0, tf, (tf - t0) / static_cast<double>(steps));
  return check_ndj(W, tr, offsets);
}

LiminfResult check_ess_liminf(const CandidateValueFunction& W, double t, const Vec& x,
                              const std::vector<double>& annuli, std::size_t samples,
                              double quantile, double liminf_tol, std::uint64_t seed,
                              const std::function<bool(double, const Vec&)>& admissible) {
  if (samples < 30) throw PreconditionError("ess-liminf needs at least 30 samples per annulus");
  for (std::size_t i = 1; i < annuli.size(); ++i) {
    if (!(annuli[i] < annuli[i - 1])) throw PreconditionError("annuli radii must decrease");
  }
  LiminfResult res;
  res.value = W(t, x);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto n = x.size();
  std::size_t drawn = 0;
  std::size_t kept = 0;
  for (double r : annuli) {
    std::vector<double> vals;
    vals.reserve(samples);
    std::size_t attempts = 0;
    while (vals.size() < samples && attempts < 5 * samples) {
      ++attempts;
      ++drawn;
      Vec dir(n);
      for (Eigen::Index i = 0; i < n; ++i) dir[i] = gauss(rng);
      const double nd = dir.norm();
      if (nd == 0.0) continue;
      // Uniform in the shell r/2 < |y - x| <= r.
      const double lo = std::pow(0.5 * r, static_cast<double>(n));
      const double hi = std::pow(r, static_cast<double>(n));
      const double rad = std::pow(lo + (hi - lo) * unit(rng), 1.0 / static_cast<double>(n));
      const Vec y = x + (rad / nd) * dir;
      if (admissible && !admissible(t, y)) continue;
      ++kept;
      vals.push_back(W(t, y));
    }
    if (vals.empty()) continue;
    std::sort(vals.begin(), vals.end());
    const auto idx = static_cast<std::size_t>(std::floor(quantile * static_cast<double>(vals.size() - 1)));
    res.proxy = std::min(res.proxy, vals[idx]);
  }
  res.coverage = drawn > 0 ? static_cast<double>(kept) / static_cast<double>(drawn) : 0.0;
  if (res.coverage < 0.5) res.warning = "annulus coverage below 50%";
  if (res.value == kInf) {
    res.pass = true;
  } else {
    res.pass = res.proxy <= res.value + liminf_tol;
  }
  return res;
}

MonotoneResult check_monotone_cost(const CandidateValueFunction& W, const ControlProblem& problem,
                                   const PiecewiseConstantControl& control, double t0,
                                   const Vec& x0, double tf, double step) {
  IntegrateOptions io;
  io.accumulate_cost = true;
  Trajectory tr = integrate(problem, control, t0, x0, tf, step, io);
  MonotoneResult res;
  res.exited = tr.exited_domain;
  res.worst = -kInf;
  double prev = kInf;
  for (std::size_t k = 0; k < tr.size(); ++k) {
    const double t = tr.times[k];
    if (!problem.verification_is_domain && !problem.verification_domain.contains(t, tr.states[k])) {
      res.exited = true;
      break;
    }
    const double phi = W(t, tr.states[k]) + tr.cost[k];
    if (k > 0) {
      const double drop = prev - phi;
      ++res.steps;
      if (!std::isnan(drop) && drop > res.worst) {
        res.worst = drop;
        res.witness_time = t;
      }
    }
    prev = phi;
  }
  if (res.steps == 0) res.worst = 0.0;
  return res;
}

Certificate corollary_eps_bound(const VerificationReport& report, double eps, double g_l1) {
  if (report.theorem != Theorem::corollary_eps) {
    throw PreconditionError("corollary bound needs a report produced in eps mode");
  }
  if (eps < 0.0 || g_l1 < 0.0) throw PreconditionError("eps and ||g||_1 must be non-negative");
  Certificate c;
  c.bound = eps * (1.0 + g_l1);
  std::ostringstream os;
  os.precision(10);
  if (report.conclusion) {
    c.certified = true;
    os << "W <= V + " << c.bound << " on Q (eps = " << eps << ", ||g||_1 = " << g_l1 << ")";
  } else {
    os << "no certificate: a relaxed hypothesis failed";
  }
  c.text = os.str();
  return c;
}

VerificationReport check_infinite_horizon(const CandidateValueFunction& W,
                                          const ControlProblem& pr,
                                          const HypothesisCheckSpec& spec_in,
                                          const std::vector<double>& horizons,
                                          const std::vector<InfiniteHorizonProbe>& probes,
                                          std::vector<TailRecord>* tails) {
  if (pr.horizon_mode != HorizonMode::infinite || !pr.target_neighborhood) {
    throw PreconditionError("infinite-horizon check needs a problem in infinite mode with S1");
  }
  if (horizons.empty()) throw PreconditionError("no horizons given");
  const auto started = std::chrono::steady_clock::now();
  HypothesisCheckSpec spec = spec_in;
  spec.theorem = Theorem::teo2;
  VerificationReport rep = check_hypotheses(W, pr, spec);
  const SetSpec& S1 = *pr.target_neighborhood;
  const Box window = spec.grid.window();

  // ii on S1: interior samples by rejection plus grid nodes.
  {
    std::vector<Point> pts;
    for (std::size_t k = 0; k < spec.grid.size(); ++k) {
      Point p = spec.grid.point(k);
      if (S1.contains(p.t, p.x)) pts.push_back(p);
    }
    for (const Point& p : uniform_points(window, 4 * spec.target_samples, spec.seed + 23)) {
      if (S1.contains(p.t, p.x)) pts.push_back(p);
    }
    Worst ii;
    for (const Point& p : pts) {
      const double w = W(p.t, p.x);
      ii.offer(w - pr.psi(p.t, p.x), p, w);
    }
    auto rec = make_record("ii", "W <= psi on the target neighbourhood", ii, spec.target_tol,
                           pts.size(), 0);
    for (auto& h : rep.hypotheses) {
      if (h.id == "ii") h = rec;
    }
  }

  // Structural property: target points at late times.
  {
    Box late = window;
    late.t_lo = window.t_hi - 0.1 * (window.t_hi - window.t_lo);
    auto pts = pr.target.sample(late, spec.target_samples, spec.seed + 29);
    HypothesisRecord rec;
    rec.id = "star";
    rec.description = "target reaches arbitrarily late times";
    rec.points_checked = pts.size();
    double latest = -kInf;
    for (const Point& p : pts) {
      if (pr.target.contains(p.t, p.x)) latest = std::max(latest, p.t);
    }
    rec.verdict = latest >= late.t_lo ? Verdict::pass : Verdict::fail;
    rec.worst_violation = rec.verdict == Verdict::pass ? 0.0 : kInf;
    rec.witness_value = latest;
    std::ostringstream os;
    os << "latest sampled target time " << latest << " in window ending at " << window.t_hi;
    rec.note = os.str();
    rep.hypotheses.push_back(rec);
  }

  // Tail comparison along probe trajectories.
  {
    std::vector<double> hs = horizons;
    std::sort(hs.begin(), hs.end());
    const std::size_t J = hs.size();
    const std::size_t j0 = J / 2;
    Worst tail;
    std::size_t checked = 0;
    std::size_t inconclusive = 0;
    for (const auto& probe : probes) {
      TailRecord tr;
      tr.horizons = hs;
      const double T = hs.back();
      Trajectory traj = integrate(pr, probe.control, probe.start.t, probe.start.x, T,
                                  (T - probe.start.t) / 4000.0);
      std::vector<double> dist;
      for (double h : hs) {
        if (h > traj.end()) {
          tr.inconclusive = true;
          break;
        }
        const Vec x = traj.state_at(h);
        tr.W_values.push_back(W(h, x));
        tr.psi_values.push_back(S1.contains(h, x) ? pr.psi(h, x) : kInf);
        dist.push_back(pr.target.distance(h, x));
      }
      if (!tr.inconclusive) {
        for (std::size_t j = j0 + 1; j < dist.size(); ++j) {
          if (dist[j] > dist[j - 1] + spec.tol.dist_tol) tr.inconclusive = true;
        }
        for (std::size_t j = j0; j < tr.psi_values.size(); ++j) {
          if (tr.psi_values[j] == kInf) tr.inconclusive = true;
        }
      }
      if (tr.inconclusive) {
        ++inconclusive;
      } else {
        ++checked;
        const double mw = *std::max_element(tr.W_values.begin() + static_cast<std::ptrdiff_t>(j0), tr.W_values.end());
        const double mp = *std::max_element(tr.psi_values.begin() + static_cast<std::ptrdiff_t>(j0), tr.psi_values.end());
        tr.margin = mw - mp;
        tail.offer(tr.margin, probe.start, mw);
      }
      if (tails) tails->push_back(tr);
    }
    auto rec = make_record("tail", "limsup of W along probes does not exceed limsup of psi", tail,
                           spec.ndj_tol, checked, inconclusive);
    if (inconclusive > 0) rec.note = std::to_string(inconclusive) + " probe(s) inconclusive";
    rep.hypotheses.push_back(rec);
  }
  rep.recompute_conclusion();
  rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  return rep;
}

std::vector<TubeRow> crossing_tube_statistic(const RectifiableSet& A, const ControlProblem& problem,
                                             const Vec& omega, const StartSampler& starts,
                                             double t0, double t1,
                                             const std::vector<double>& deltas,
                                             std::size_t trials, std::uint64_t seed,
                                             std::size_t steps) {
  std::mt19937_64 rng(seed);
  std::vector<Vec> ys;
  ys.reserve(trials);
  for (std::size_t i = 0; i < trials; ++i) ys.push_back(starts(rng));
  std::vector<std::vector<double>> fractions(trials, std::vector<double>(deltas.size(), 0.0));
  parallel_for(trials, [&](std::size_t i) {
    if (!problem.domain.contains(t0, ys[i])) return;
    auto control = PiecewiseConstantControl::constant(t0, t1, omega);
    Trajectory tr = integrate(problem, control, t0, ys[i], t1,
                              (t1 - t0) / static_cast<double>(steps));
    std::vector<std::size_t> counts(deltas.size(), 0);
    for (std::size_t k = 0; k < tr.size(); ++k) {
      const double d = A.distance(tr.times[k], tr.states[k]);
      for (std::size_t j = 0; j < deltas.size(); ++j) {
        if (d <= deltas[j]) ++counts[j];
      }
    }
    for (std::size_t j = 0; j < deltas.size(); ++j) {
      fractions[i][j] = static_cast<double>(counts[j]) / static_cast<double>(tr.size());
    }
  });
  std::vector<TubeRow> rows;
  for (std::size_t j = 0; j < deltas.size(); ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < trials; ++i) sum += fractions[i][j];
    rows.push_back({deltas[j], trials ? sum / static_cast<double>(trials) : 0.0});
  }
  return rows;
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw PreconditionError("line fit needs >= 2 points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit f;
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  f.r2 = (sxx > 0.0 && syy > 0.0) ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

DppResult dpp_residual(const CandidateValueFunction& W, const ControlProblem& problem, double t0,
                       const Vec& x0, double T1, std::size_t pieces, std::size_t control_samples,
                       double step) {
  if (!(T1 > t0)) throw PreconditionError("DPP residual needs T1 > t0");
  const auto controls = problem.control_set.sample(control_samples);
  check_brute_force_size(pieces, controls.size(), 6, 15625);
  std::size_t total = 1;
  for (std::size_t i = 0; i < pieces; ++i) total *= controls.size();
  const double h = step > 0.0 ? step : (T1 - t0) / 2000.0;
  std::vector<double> costs(total, kInf);
  parallel_for(total, [&](std::size_t code) {
    std::vector<Vec> vals(pieces);
    std::size_t c = code;
    for (std::size_t j = pieces; j-- > 0;) {
      vals[j] = controls[c % controls.size()];
      c /= controls.size();
    }
    auto u = PiecewiseConstantControl::uniform(t0, T1, std::move(vals));
    BolzaOutcome o = bolza_cost(problem, u, t0, x0, T1, h);
    if (o.hit || o.exited_domain) return;
    costs[code] = o.running_cost + W(T1, o.end_state);
  });
  DppResult res;
  res.searched = total;
  for (double c : costs) {
    if (c == kInf) {
      ++res.dropped;
    } else {
      res.best = std::min(res.best, c);
    }
  }
  if (res.dropped == total) {
    throw PreconditionError("every searched control reaches the target before T1; choose a smaller T1");
  }
  res.residual = W(t0, x0) - res.best;
  return res;
}

std::vector<DivergenceRow> divergence_probe(
    const ControlProblem& problem, double t0, const Vec& x0,
    const std::function<PiecewiseConstantControl(double)>& family,
    const std::vector<double>& budgets, double step) {
  std::vector<DivergenceRow> rows;
  for (double b : budgets) {
    auto u = family(b);
    BolzaOutcome o = bolza_cost(problem, u, t0, x0, u.end(), step);
    rows.push_back({b, o.total, o.hit});
  }
  return rows;
}

}  // namespace hjbv

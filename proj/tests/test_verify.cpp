#include "support.hpp"

#include <gtest/gtest.h>

#include <hjbverify/report.hpp>
#include <hjbverify/verify.hpp>

#include <random>
#include <sstream>

using namespace hjbv;
using namespace testing_support;

namespace {

constexpr double kPi = std::numbers::pi;

CandidateValueFunction plain(std::string label, CandidateValueFunction::ValueFn f,
                             RectifiableSet A = {}) {
  return CandidateValueFunction(std::move(label), std::move(f), nullptr, std::move(A));
}

PiecewiseConstantControl constant(double t0, double t1, double u) {
  return PiecewiseConstantControl::constant(t0, t1, scalar_vec(u));
}

}  // namespace

TEST(HjbResidual, SineRegionCancels) {
  const auto e = gallery_sin_one_over_x();
  auto r = hjb_residual(e.candidate, e.problem, 0.0, scalar_vec(2.0 / kPi), 21, 2.0 / 256.0);
  ASSERT_TRUE(r.has_value());
  EXPECT_NEAR(*r, 0.0, 1e-12);
}

TEST(HjbResidual, ConstantCandidateGivesMinimumCost) {
  const auto e = gallery_counterexample_L();
  auto r = hjb_residual(e.candidate, e.problem, 0.0, scalar_vec(0.5), 21, 1e-2);
  ASSERT_TRUE(r.has_value());
  EXPECT_NEAR(*r, 1.0625, 1e-12);
}

TEST(HjbResidual, NearExceptionalSetIsExcluded) {
  const auto e = gallery_sin_one_over_x();
  EXPECT_FALSE(hjb_residual(e.candidate, e.problem, 1.0 + 1e-3, scalar_vec(0.5), 21, 1e-2));
}

TEST(HjbResidual, InfiniteCandidateIsVacuous) {
  auto W = plain("inf", [](double, const Vec&) { return kInf; });
  auto r = hjb_residual(W, oscillator_problem(), 0.0, vec({1.0, 1.0}), 5, 1e-2);
  ASSERT_TRUE(r.has_value());
  EXPECT_EQ(*r, kInf);
}

TEST(Exclusion, ExcludedIffWithinRadius) {
  const auto e = gallery_oscillator();
  const double rho = 1.0 / 16.0;
  for (const auto& p : uniform_points(Box{0, 1, vec({-3, -3}), vec({3, 3})}, 500, 77)) {
    const bool excluded = !hjb_residual(e.candidate, e.problem, p.t, p.x, 5, rho).has_value();
    EXPECT_EQ(excluded, e.candidate.exceptional_set().distance(p.t, p.x) <= rho) << describe(p);
  }
}

TEST(Ndj, ContinuousCandidateAlongFlow) {
  const auto e = gallery_oscillator();
  for (double u : {-1.0, 0.0, 1.0}) {
    auto r = check_ndj(e.candidate, e.problem, scalar_vec(u), 0.0, vec({1.3, -0.4}), 3.0, 300,
                       {1e-2, 1e-3, 1e-4});
    EXPECT_LE(r.worst, 1e-3) << u;
    EXPECT_GT(r.checked, 0u);
  }
}

TEST(Ndj, ClosedFormAcrossTimeOne) {
  const auto e = gallery_sin_one_over_x();
  auto r = check_ndj(e.candidate, e.problem, scalar_vec(0.0), 0.5, scalar_vec(0.2), 1.5, 1000,
                     {1e-2, 1e-3, 1e-4});
  EXPECT_LE(r.worst, 1e-4 + 1e-12);
}

TEST(Ndj, ConstructedJumpIsFlagged) {
  auto W = plain("jump", [](double t, const Vec&) { return t < 1.0 ? 1.0 : 0.0; });
  auto r = check_ndj(W, sin1x_problem(0.01), scalar_vec(0.0), 0.5, scalar_vec(0.2), 1.5, 1000,
                     {1e-2, 1e-3, 1e-4});
  EXPECT_EQ(r.worst, 1.0);
  ASSERT_TRUE(r.witness_time);
  EXPECT_NEAR(*r.witness_time, 1.0, 1e-3);
}

TEST(EssLiminf, SegmentPointOfSine) {
  const auto e = gallery_sin_one_over_x();
  auto r = check_ess_liminf(e.candidate, 0.5, scalar_vec(0.0), {1e-1, 1e-2, 1e-3, 1e-4}, 200, 0.0,
                            1e-2);
  EXPECT_TRUE(r.pass);
  EXPECT_LE(r.proxy, 1e-2);
  EXPECT_EQ(r.value, 0.0);
}

TEST(EssLiminf, ContinuousPasses) {
  auto W = plain("smooth", [](double t, const Vec& x) { return std::sin(t + x[0]) + x[1] * x[1]; });
  auto r = check_ess_liminf(W, 0.3, vec({0.2, -0.5}), {1e-4, 1e-5, 1e-6}, 50, 0.05, 1e-3);
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.proxy, r.value, 1e-3);
}

TEST(EssLiminf, IsolatedDipFails) {
  auto W = plain("dip", [](double, const Vec& x) { return x[0] == 0.0 ? 0.0 : 1.0; });
  auto r = check_ess_liminf(W, 0.0, scalar_vec(0.0), {1e-1, 1e-2}, 50, 0.05, 1e-2);
  EXPECT_FALSE(r.pass);
  EXPECT_EQ(r.proxy, 1.0);
}

TEST(EssLiminf, CoverageWarning) {
  auto W = plain("half", [](double, const Vec& x) { return x[0]; });
  auto r = check_ess_liminf(W, 0.0, scalar_vec(0.0), {1e-1}, 40, 0.0, 1e-2, 3,
                            [](double, const Vec& y) { return y[0] > 0.09; });
  EXPECT_LT(r.coverage, 0.5);
  EXPECT_FALSE(r.warning.empty());
}

TEST(MonotoneCost, SineDoNothing) {
  const auto e = gallery_sin_one_over_x();
  auto r = check_monotone_cost(e.candidate, e.problem, constant(-1.5, 2.0, 0.0), -1.5,
                               scalar_vec(0.3), 2.0, 1e-3);
  EXPECT_LE(r.worst, 1e-8);
}

TEST(MonotoneCost, OscillatorOptimalArc) {
  const auto e = gallery_oscillator();
  auto r = check_monotone_cost(e.candidate, e.problem, constant(0, kPi, 1.0), 0.0,
                               vec({2.0, 0.0}), kPi - 1e-2, kPi / 2000);
  EXPECT_LE(r.worst, 1e-2);
}

TEST(MonotoneCost, OscillatorWrongControlIncreases) {
  const auto e = gallery_oscillator();
  auto r = check_monotone_cost(e.candidate, e.problem, constant(0, 2, -1.0), 0.0, vec({2.0, 0.0}),
                               2.0, 1e-3);
  EXPECT_LE(r.worst, 1e-9);
  const Vec end = integrate(e.problem, constant(0, 2, -1.0), 0.0, vec({2.0, 0.0}), 2.0, 1e-3)
                      .final_state();
  EXPECT_GT(e.candidate(2.0, end) + 2.0, e.candidate(0.0, vec({2.0, 0.0})) + 0.5);
}

TEST(Corollary, BoundArithmetic) {
  VerificationReport rep;
  rep.theorem = Theorem::corollary_eps;
  rep.conclusion = true;
  EXPECT_EQ(corollary_eps_bound(rep, 0.0, 1.0).bound, 0.0);
  auto c = corollary_eps_bound(rep, 0.01, 1.0);
  EXPECT_TRUE(c.certified);
  EXPECT_NEAR(c.bound, 0.02, 1e-15);
  rep.conclusion = false;
  EXPECT_FALSE(corollary_eps_bound(rep, 0.01, 1.0).certified);
}

TEST(Corollary, ModeMismatch) {
  VerificationReport rep;
  rep.theorem = Theorem::teo1;
  EXPECT_THROW(corollary_eps_bound(rep, 0.01, 1.0), Error);
}

TEST(Corollary, ZeroEpsMatchesTheoremOne) {
  const auto e = gallery_fuller();
  auto spec = e.check_spec(1.0 / 16.0, 3.0);
  auto a = check_hypotheses(e.candidate, e.problem, spec);
  spec.theorem = Theorem::corollary_eps;
  spec.eps = 0.0;
  auto b = check_hypotheses(e.candidate, e.problem, spec);
  ASSERT_EQ(a.hypotheses.size(), b.hypotheses.size());
  for (std::size_t i = 0; i < a.hypotheses.size(); ++i) {
    EXPECT_EQ(a.hypotheses[i].verdict, b.hypotheses[i].verdict) << a.hypotheses[i].id;
    EXPECT_EQ(a.hypotheses[i].worst_violation, b.hypotheses[i].worst_violation);
  }
  EXPECT_EQ(a.conclusion, b.conclusion);
}

TEST(InfiniteHorizon, DecayPasses) {
  const auto e = gallery_infinite_decay();
  std::vector<TailRecord> tails;
  auto rep = check_infinite_horizon(e.candidate, e.problem, e.check_spec(), e.horizons, e.probes,
                                    &tails);
  EXPECT_TRUE(rep.conclusion);
  ASSERT_NE(rep.find("star"), nullptr);
  ASSERT_NE(rep.find("tail"), nullptr);
  ASSERT_EQ(tails.size(), e.probes.size());
  for (const auto& t : tails) {
    EXPECT_FALSE(t.inconclusive);
    for (std::size_t j = 0; j < t.horizons.size(); ++j) {
      EXPECT_NEAR(t.W_values[j], t.psi_values[j], 1e-12);
    }
  }
}

TEST(InfiniteHorizon, StartOnTarget) {
  const auto e = gallery_infinite_decay();
  EXPECT_EQ(e.candidate(3.0, scalar_vec(0.0)), 0.0);
  EXPECT_EQ(e.problem.psi(3.0, scalar_vec(0.0)), 0.0);
  InfiniteHorizonProbe probe{Point{0.0, scalar_vec(0.0)}, constant(0, 40, 1.0)};
  std::vector<TailRecord> tails;
  auto rep = check_infinite_horizon(e.candidate, e.problem, e.check_spec(), e.horizons, {probe},
                                    &tails);
  EXPECT_TRUE(rep.conclusion);
}

TEST(InfiniteHorizon, OffsetCandidateFailsTargetCheck) {
  const auto e = gallery_infinite_decay();
  auto rep = check_infinite_horizon(e.candidate.shifted(0.1), e.problem, e.check_spec(),
                                    e.horizons, e.probes);
  const auto* ii = rep.find("ii");
  ASSERT_NE(ii, nullptr);
  EXPECT_EQ(ii->verdict, Verdict::fail);
  EXPECT_NEAR(ii->worst_violation, 0.1, 1e-12);
  EXPECT_FALSE(rep.conclusion);
}

TEST(CrossingTube, TimeHyperplane) {
  RectifiableSet A(1, {ManifoldPiece::segment("t=1", vec({1.0, -10.0}), vec({1.0, 10.0}), false)});
  auto starts = [](std::mt19937_64& rng) {
    return scalar_vec(std::uniform_real_distribution<double>(-1, 1)(rng));
  };
  auto rows = crossing_tube_statistic(A, sin1x_problem(0.01), scalar_vec(0.0), starts, 0.0, 2.0,
                                      {0.5, 0.1, 0.05}, 20);
  for (const auto& r : rows) EXPECT_NEAR(r.mean_fraction, r.delta, 2e-3) << r.delta;
}

TEST(CrossingTube, CircleFractionIsLinear) {
  RectifiableSet A(2, {ManifoldPiece::circle_arc("unit", 1.0, 0.0, 1.0, 0.0, 2.0 * kPi)});
  auto starts = [](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> r(0.5, 1.5), a(0.0, 2.0 * kPi);
    const double rr = r(rng), aa = a(rng);
    return vec({1.0 + rr * std::cos(aa), rr * std::sin(aa)});
  };
  std::vector<double> deltas{0.1, 0.05, 0.025, 0.0125};
  auto rows = crossing_tube_statistic(A, oscillator_problem(), scalar_vec(-1.0), starts, 0.0,
                                      2.0 * kPi, deltas, 500);
  std::vector<double> f;
  for (const auto& r : rows) f.push_back(r.mean_fraction);
  auto fit = fit_line(deltas, f);
  EXPECT_GT(fit.r2, 0.95);
  EXPECT_GT(fit.slope, 0.0);
  EXPECT_LT(f.back(), f.front());
}

TEST(CrossingTube, InvariantCircleStaysInside) {
  RectifiableSet A(2, {ManifoldPiece::circle_arc("unit", 1.0, 0.0, 1.0, 0.0, 2.0 * kPi)});
  auto starts = [](std::mt19937_64& rng) {
    const double a = std::uniform_real_distribution<double>(0.0, 2.0 * kPi)(rng);
    return vec({1.0 + std::cos(a), std::sin(a)});
  };
  auto rows = crossing_tube_statistic(A, oscillator_problem(), scalar_vec(1.0), starts, 0.0, 3.0,
                                      {0.1, 0.01}, 10);
  for (const auto& r : rows) EXPECT_EQ(r.mean_fraction, 1.0);
}

TEST(LinearFitTest, ExactLine) {
  auto f = fit_line({0, 1, 2, 3}, {1, 3, 5, 7});
  EXPECT_NEAR(f.slope, 2.0, 1e-12);
  EXPECT_NEAR(f.intercept, 1.0, 1e-12);
  EXPECT_NEAR(f.r2, 1.0, 1e-12);
}

namespace {

GridField field_2d(double h, const std::function<double(double, double)>& f) {
  auto grid = GridSpec::from_window(Box{0, 0, scalar_vec(-1), scalar_vec(1)}, h);
  grid.time = Axis{-1.0, 1.0, grid.space[0].count};
  GridField g(grid, 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point p = grid.point(i);
    g.values[i] = f(p.t, p.x[0]);
  }
  return g;
}

double max_abs_diff(const GridField& a, const GridField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    m = std::max(m, std::abs(a.values[i] - b.values[i]));
  }
  return m;
}

}  // namespace

TEST(Envelope, ContinuousFieldIsKept) {
  const double h = 1.0 / 64.0;
  auto f = field_2d(h, [](double t, double x) { return std::sin(t + x); });
  // one-cell modulus of continuity of sin(t + x)
  const double modulus = 2.0 * h;
  EXPECT_LE(max_abs_diff(envelope(f, EnvelopeMode::lower), f), modulus);
  EXPECT_LE(max_abs_diff(envelope(f, EnvelopeMode::upper), f), modulus);
}

TEST(Envelope, StepField) {
  const double h = 0.1;
  auto grid = GridSpec::from_window(Box{0, 0, scalar_vec(-1), scalar_vec(1)}, h);
  GridField f(grid, 0.0);
  std::size_t zero = 0;
  for (std::size_t i = 0; i < grid.layer_size(); ++i) {
    const double x = grid.state(i)[0];
    f.values[i] = x < -1e-12 ? 1.0 : 0.0;
    if (std::abs(x) < 1e-12) zero = i;
  }
  auto lo = envelope(f, EnvelopeMode::lower);
  auto up = envelope(f, EnvelopeMode::upper);
  EXPECT_EQ(lo.values[zero], 0.0);
  EXPECT_EQ(up.values[zero - 1], 1.0);
}

TEST(Envelope, Algebra) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1, 1);
  const double h = 1.0 / 16.0;
  auto f = field_2d(h, [&](double t, double x) { return u(rng) + (t > x ? 1.0 : 0.0); });
  f.values[5] = kInf;
  auto lo = envelope(f, EnvelopeMode::lower);
  auto up = envelope(f, EnvelopeMode::upper);
  GridField neg = f;
  for (double& v : neg.values) v = -v;
  auto lo_neg = envelope(neg, EnvelopeMode::lower);
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    EXPECT_LE(lo.values[i], f.values[i]);
    EXPECT_GE(up.values[i], f.values[i]);
    EXPECT_EQ(lo_neg.values[i], -up.values[i]);
  }
  EXPECT_EQ(envelope(lo, EnvelopeMode::lower).values, lo.values);
  EXPECT_EQ(envelope(up, EnvelopeMode::upper).values, up.values);
}

// The 3x3 opening flattens ridges by about h^2 |W''|, which for sin(1/x) is
// large near x = 0.1. Away from A the lower envelope must agree with W on
// almost every cell and the worst cell must improve under refinement.
namespace {

struct EnvelopeGap {
  double worst = 0.0;
  double fraction_within = 0.0;
};

EnvelopeGap lower_envelope_gap(const GridField& W, const RectifiableSet& A,
                               const std::function<bool(const Point&)>& keep, double tol) {
  const auto lo = envelope(W, EnvelopeMode::lower);
  const double margin = 3.0 * W.grid.state_mesh();
  EnvelopeGap g;
  std::size_t total = 0, within = 0;
  for (std::size_t i = 0; i < W.grid.size(); ++i) {
    const Point p = W.grid.point(i);
    if (!keep(p) || A.distance(p.t, p.x) <= margin) continue;
    const double d = std::abs(lo.values[i] - W.values[i]);
    g.worst = std::max(g.worst, d);
    ++total;
    if (d <= tol) ++within;
  }
  g.fraction_within = static_cast<double>(within) / static_cast<double>(total);
  return g;
}

}  // namespace

TEST(Envelope, SineValueOnGrid) {
  const auto e = gallery_sin_one_over_x();
  auto tabulate = [&](double h) {
    GridField V(GridSpec::from_window(e.window, h, h), 0.0);
    for (std::size_t i = 0; i < V.grid.size(); ++i) {
      const Point p = V.grid.point(i);
      V.values[i] = sin1x_value(p.t, p.x[0]);
    }
    return V;
  };
  auto away_from_origin = [](const Point& p) { return std::abs(p.x[0]) >= 0.1; };
  const auto A = e.candidate.exceptional_set();
  const auto coarse = tabulate(1.0 / 64.0);
  const auto fine = tabulate(1.0 / 128.0);
  const auto gc = lower_envelope_gap(coarse, A, away_from_origin, 1e-2);
  const auto gf = lower_envelope_gap(fine, A, away_from_origin, 1e-2);
  EXPECT_GE(gf.fraction_within, 0.98);
  EXPECT_LT(gf.worst, gc.worst);

  // the upper envelope raises the cells just below the graph
  const double h = fine.grid.state_mesh();
  const auto up = envelope(fine, EnvelopeMode::upper);
  std::size_t raised = 0;
  for (std::size_t i = 0; i < fine.grid.size(); ++i) {
    const Point p = fine.grid.point(i);
    if (std::abs(p.x[0]) < 0.1) continue;
    const double s = std::sin(1.0 / p.x[0]);
    const bool adjacent = p.t < s && p.t > s - 1.5 * h && s < 1.0 - 2 * h;
    if (adjacent && up.values[i] > fine.values[i] + 0.5) ++raised;
  }
  EXPECT_GT(raised, 0u);
}

TEST(Envelope, LiminfConsistentSlice) {
  const auto e = gallery_oscillator();
  auto tabulate = [&](double h) {
    auto grid = GridSpec::from_window(Box{0, 0, vec({-2, -2}), vec({2, 2})}, h);
    GridField W(grid, 0.0);
    for (std::size_t i = 0; i < grid.layer_size(); ++i) W.values[i] = e.candidate(0.0, grid.state(i));
    return W;
  };
  auto all = [](const Point&) { return true; };
  const auto A = e.candidate.exceptional_set();
  const auto coarse = tabulate(1.0 / 32.0);
  const auto fine = tabulate(1.0 / 64.0);
  const auto gc = lower_envelope_gap(coarse, A, all, 1e-2);
  const auto gf = lower_envelope_gap(fine, A, all, 1e-2);
  EXPECT_LT(gf.worst, gc.worst);
  EXPECT_GE(gf.fraction_within, 0.98);

  // points where the ess-liminf check passes sit where the envelope agrees
  const auto lo = envelope(fine, EnvelopeMode::lower);
  std::size_t agree = 0, passing = 0;
  for (std::size_t i = 0; i < fine.grid.layer_size(); i += 53) {
    const Vec x = fine.grid.state(i);
    if (A.distance(0.0, x) <= 3.0 * fine.grid.state_mesh()) continue;
    auto r = check_ess_liminf(e.candidate, 0.0, x, {1e-2, 1e-3, 1e-4}, 30, 0.0, 1e-2);
    if (!r.pass) continue;
    ++passing;
    if (std::abs(lo.values[i] - fine.values[i]) <= 1e-2) ++agree;
  }
  EXPECT_GT(passing, 100u);
  EXPECT_GE(static_cast<double>(agree), 0.98 * static_cast<double>(passing));
}

TEST(Dpp, SineExact) {
  const auto e = gallery_sin_one_over_x();
  auto r = dpp_residual(e.candidate, e.problem, 0.0, scalar_vec(2.0 / kPi), 0.5, 1, 2);
  EXPECT_NEAR(r.residual, 0.0, 1e-12);
}

TEST(Dpp, ZeroCandidateIsSubValue) {
  auto W = plain("zero", [](double, const Vec&) { return 0.0; });
  auto r = dpp_residual(W, still_problem(), 0.0, scalar_vec(0.0), 0.5, 2, 2);
  EXPECT_NEAR(r.residual, -0.5, 1e-12);
}

TEST(Dpp, OscillatorRandomStart) {
  const auto e = gallery_oscillator();
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int k = 0; k < 5; ++k) {
    const Vec x = vec({u(rng), u(rng)});
    if (x.norm() < 0.5) continue;
    auto r = dpp_residual(e.candidate, e.problem, 0.0, x, 0.2, 2, 2);
    EXPECT_LE(std::abs(r.residual), 2e-2) << x.transpose();
  }
}

TEST(Dpp, AllHittingIsPrecondition) {
  const auto e = gallery_sin_one_over_x();
  EXPECT_THROW(dpp_residual(e.candidate, e.problem, 0.9, scalar_vec(0.5), 1.5, 1, 2),
               PreconditionError);
}

TEST(Divergence, LoiteringCostFalls) {
  const auto e = gallery_counterexample_L();
  ASSERT_TRUE(e.divergence);
  const auto& d = *e.divergence;
  auto rows = divergence_probe(e.problem, d.t0, d.x0, d.family, d.budgets, d.step);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LT(rows[i].cost, rows[i - 1].cost);
  EXPECT_LT(rows.back().cost, -1e3);
}

TEST(Report, VerdictInvariants) {
  const auto e = gallery_counterexample_L();
  auto rep = check_hypotheses(e.candidate, e.problem, e.check_spec());
  for (const auto& h : rep.hypotheses) {
    if (h.verdict == Verdict::fail) {
      EXPECT_GT(h.worst_violation, h.tolerance) << h.id;
      EXPECT_TRUE(h.witness.has_value()) << h.id;
    }
  }
  EXPECT_FALSE(rep.conclusion);
  auto json = report_to_json(rep, false);
  EXPECT_EQ(json, report_to_json(check_hypotheses(e.candidate, e.problem, e.check_spec()), false));
  std::ostringstream csv;
  write_residuals_csv(csv, rep);
  EXPECT_FALSE(csv.str().empty());
}

#include "support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace hjbv;
using namespace testing_support;

namespace {

constexpr double kPi = std::numbers::pi;

PiecewiseConstantControl constant(double t0, double t1, double u) {
  return PiecewiseConstantControl::constant(t0, t1, scalar_vec(u));
}

}  // namespace

TEST(Integrate, OscillatorArcReachesOrigin) {
  auto tr = integrate(oscillator_problem(), constant(0, kPi, 1.0), 0.0, vec({2.0, 0.0}), kPi,
                      kPi / 2000);
  EXPECT_LE(tr.final_state().norm(), 1e-6);
  // closed form (1 + cos t, -sin t)
  for (std::size_t i = 0; i < tr.size(); i += 97) {
    const double t = tr.times[i];
    EXPECT_NEAR(tr.states[i][0], 1.0 + std::cos(t), 1e-9);
    EXPECT_NEAR(tr.states[i][1], -std::sin(t), 1e-9);
  }
}

TEST(Integrate, ZeroDynamicsKeepState) {
  auto p = sin1x_problem(0.01);
  auto u = PiecewiseConstantControl::uniform(0, 3, {scalar_vec(1), scalar_vec(-0.3), scalar_vec(0)});
  auto tr = integrate(p, u, 0.0, scalar_vec(0.5), 3.0);
  for (const auto& x : tr.states) EXPECT_EQ(x[0], 0.5);
}

TEST(Integrate, DoubleIntegratorIsExact) {
  auto tr = integrate(fuller_problem(), constant(0, 1, 1.0), 0.0, vec({0.0, 0.0}), 1.0);
  EXPECT_NEAR(tr.final_state()[0], 0.5, 1e-10);
  EXPECT_NEAR(tr.final_state()[1], 1.0, 1e-10);
}

TEST(Integrate, NonFiniteStateThrows) {
  auto p = still_problem();
  p.dynamics = [](double, const Vec& x, const Vec&) { return scalar_vec(x[0] * x[0]); };
  try {
    integrate(p, constant(0, 2, 0.0), 0.0, scalar_vec(1.0), 2.0, 1e-3);
    FAIL() << "expected blow-up";
  } catch (const BlowupError& e) {
    // the exact solution 1/(1-t) blows up at t = 1; RK4 steps may land just past it
    EXPECT_GT(e.last_valid_time(), 0.9);
    EXPECT_LT(e.last_valid_time(), 1.1);
  }
}

TEST(Integrate, StartOutsideDomainThrows) {
  auto p = gallery_counterexample_L().problem;
  p.domain = p.verification_domain;
  EXPECT_THROW(integrate(p, constant(0, 1, 0.0), 0.0, scalar_vec(3.0), 1.0), PreconditionError);
}

TEST(Integrate, DomainExitIsFlaggedAndLocated) {
  auto p = gallery_counterexample_L().problem;
  p.domain = p.verification_domain;  // |x| < 1
  auto tr = integrate(p, constant(0, 2, 1.0), 0.0, scalar_vec(0.5), 2.0, 1e-2);
  EXPECT_TRUE(tr.exited_domain);
  EXPECT_NEAR(tr.exit_time, 0.5, 1e-8);
}

TEST(Integrate, StepHalvingIsFourthOrder) {
  const auto p = oscillator_problem();
  auto end = [&](int n) {
    return integrate(p, constant(0, kPi, 1.0), 0.0, vec({2.0, 0.0}), kPi, kPi / n).final_state();
  };
  std::vector<Vec> ends;
  for (int n : {10, 20, 40, 80, 160}) ends.push_back(end(n));
  for (std::size_t i = 0; i + 2 < ends.size(); ++i) {
    const double ratio = (ends[i] - ends[i + 1]).norm() / (ends[i + 1] - ends[i + 2]).norm();
    EXPECT_NEAR(ratio, 16.0, 2.0) << "halving " << i;
  }
}

TEST(Integrate, BreakpointAlignmentMatchesConcatenation) {
  const auto p = oscillator_problem();
  const Vec x0 = vec({0.3, -1.2});
  auto whole = integrate(p, PiecewiseConstantControl({0, 1, 2}, {scalar_vec(1), scalar_vec(-1)}),
                         0.0, x0, 2.0, 1e-2);
  auto a = integrate(p, constant(0, 1, 1.0), 0.0, x0, 1.0, 1e-2);
  auto b = integrate(p, constant(1, 2, -1.0), 1.0, a.final_state(), 2.0, 1e-2);
  EXPECT_EQ(whole.final_state(), b.final_state());
}

TEST(Integrate, ReversedDynamicsReturnToStart) {
  auto p = oscillator_problem();
  const Vec x0 = vec({1.5, 0.7});
  auto fwd = integrate(p, constant(0, kPi, 1.0), 0.0, x0, kPi, kPi / 2000);
  auto back = p;
  back.dynamics = [p](double t, const Vec& x, const Vec& u) { return Vec(-p.f(t, x, u)); };
  auto rev = integrate(back, constant(0, kPi, 1.0), 0.0, fwd.final_state(), kPi, kPi / 2000);
  EXPECT_LE((rev.final_state() - x0).norm(), 1e-8);
}

TEST(Integrate, HermiteStateBetweenSamples) {
  auto tr = integrate(oscillator_problem(), constant(0, 1, 1.0), 0.0, vec({2.0, 0.0}), 1.0, 1e-2);
  const double t = 0.4567;
  EXPECT_NEAR(tr.state_at(t)[0], 1.0 + std::cos(t), 1e-8);
}

TEST(ApproximateControl, SignOfSineWithMedian) {
  std::vector<std::pair<double, Vec>> samples;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const double t = 2.0 * kPi * (i + 0.5) / n;
    samples.emplace_back(t, scalar_vec(std::sin(t) > 0 ? 1.0 : -1.0));
  }
  std::vector<double> grid;
  for (int i = 0; i <= 64; ++i) grid.push_back(2.0 * kPi * i / 64);
  auto u = approximate_control(samples, grid, 1.0, ControlSetSpec::interval(-1, 1));
  int mismatched = 0;
  for (int c = 0; c < 64; ++c) {
    const double lo = grid[c], hi = grid[c + 1];
    const bool contains_switch = lo < kPi && kPi < hi;
    const double mid = 0.5 * (lo + hi);
    if (u(mid)[0] != (std::sin(mid) > 0 ? 1.0 : -1.0)) {
      ++mismatched;
      EXPECT_TRUE(contains_switch) << "cell " << c;
    }
  }
  EXPECT_LE(mismatched, 2);
}

TEST(ApproximateControl, ConstantStaysConstant) {
  std::vector<std::pair<double, Vec>> samples;
  for (int i = 0; i < 500; ++i) samples.emplace_back(i / 100.0 + 0.001, scalar_vec(0.25));
  for (int cells : {3, 17, 50}) {
    std::vector<double> grid;
    for (int i = 0; i <= cells; ++i) grid.push_back(5.0 * i / cells);
    auto u = approximate_control(samples, grid, 2.0, ControlSetSpec::interval(-1, 1), 401);
    for (const auto& v : u.values()) EXPECT_NEAR(v[0], 0.25, 1e-12);
  }
}

TEST(ApproximateControl, ErrorHalvesWithCells) {
  const int n = 200000;
  std::vector<std::pair<double, Vec>> samples;
  for (int i = 0; i < n; ++i) {
    const double t = 2.0 * kPi * (i + 0.5) / n;
    samples.emplace_back(t, scalar_vec(std::sin(t)));
  }
  auto l2_error = [&](int cells) {
    std::vector<double> grid;
    for (int i = 0; i <= cells; ++i) grid.push_back(2.0 * kPi * i / cells);
    auto u = approximate_control(samples, grid, 2.0, ControlSetSpec::interval(-1, 1), 20001);
    double e = 0.0;
    for (const auto& [t, v] : samples) e += std::pow(u(t)[0] - v[0], 2);
    return std::sqrt(e * 2.0 * kPi / n);
  };
  for (int cells : {16, 32, 64}) {
    const double ratio = l2_error(cells) / l2_error(2 * cells);
    EXPECT_NEAR(ratio, 2.0, 0.4) << cells;
  }
}

TEST(ApproximateControl, EmptyCellIsNamed) {
  std::vector<std::pair<double, Vec>> samples{{0.1, scalar_vec(0)}, {0.2, scalar_vec(0)}};
  try {
    approximate_control(samples, {0.0, 0.5, 1.0}, 2.0, ControlSetSpec::interval(-1, 1));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("1"), std::string::npos);
  }
}

TEST(Dependence, OscillatorDistancesShrink) {
  auto rows = continuous_dependence_probe(oscillator_problem(), constant(0, 3, 1.0), 0.0,
                                          vec({1.0, 1.0}), 3.0, {1e-1, 1e-2, 1e-3});
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_GT(rows[0].sup_distance, rows[1].sup_distance);
  EXPECT_GT(rows[1].sup_distance, rows[2].sup_distance);
  EXPECT_LT(rows[2].sup_distance, 1e-2);
}

TEST(Dependence, ZeroScaleIsExact) {
  auto rows = continuous_dependence_probe(oscillator_problem(), constant(0, 3, -1.0), 0.0,
                                          vec({1.0, 1.0}), 3.0, {0.0});
  EXPECT_EQ(rows[0].sup_distance, 0.0);
}

TEST(Dependence, StillDynamicsIgnoreControl) {
  auto rows = continuous_dependence_probe(sin1x_problem(0.01), constant(0, 2, 0.3), 0.0,
                                          scalar_vec(0.4), 2.0, {0.1, 0.05, 0.01}, 0.0, 17);
  for (const auto& r : rows) {
    // the state perturbation has norm exactly `scale`
    EXPECT_NEAR(r.sup_distance, r.scale, 1e-15);
  }
}

TEST(Bolza, OscillatorArcCost) {
  auto out = bolza_cost(oscillator_problem(), constant(0, 4, 1.0), 0.0, vec({2.0, 0.0}), 4.0, 1e-3,
                        HitOptions{1e-6, 4});
  ASSERT_TRUE(out.hit);
  EXPECT_NEAR(out.total, kPi, 1e-5);
}

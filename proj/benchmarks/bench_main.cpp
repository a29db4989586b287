#include <benchmark/benchmark.h>

#include <hjbverify/gallery.hpp>
#include <hjbverify/integrate.hpp>
#include <hjbverify/verify.hpp>

#include <numbers>

using namespace hjbv;

namespace {

void BM_Rk4Arc(benchmark::State& state) {
  const auto p = oscillator_problem();
  const auto u = PiecewiseConstantControl::constant(0, std::numbers::pi, scalar_vec(1.0));
  const double h = std::numbers::pi / static_cast<double>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(integrate(p, u, 0.0, vec({2.0, 0.0}), std::numbers::pi, h));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Rk4Arc)->Arg(500)->Arg(2000)->Arg(8000);

void BM_BruteForce(benchmark::State& state) {
  const auto p = oscillator_problem();
  BruteForceOptions o;
  o.pieces = static_cast<std::size_t>(state.range(0));
  o.control_samples = 2;
  o.horizon = 4.0;
  o.capture_radius = 1e-2;
  for (auto _ : state) {
    benchmark::DoNotOptimize(brute_force_value(p, 0.0, vec({2.0, 0.0}), o));
  }
}
BENCHMARK(BM_BruteForce)->Arg(3)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_SynthesisFuller(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(fuller_synthesis(0.4446, vec({1.0, 0.0})));
  }
}
BENCHMARK(BM_SynthesisFuller)->Unit(benchmark::kMillisecond);

void BM_ValueIteration(benchmark::State& state) {
  const auto e = gallery_oscillator();
  const double h = 1.0 / static_cast<double>(state.range(0));
  auto grid = GridSpec::from_window(Box{0, 0, vec({-4, -4}), vec({4, 4})}, h);
  ValueIterationOptions o = e.vi;
  for (auto _ : state) {
    benchmark::DoNotOptimize(value_iteration(e.problem, grid, o));
  }
}
BENCHMARK(BM_ValueIteration)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_DpStill(benchmark::State& state) {
  const auto e = gallery_sin_one_over_x();
  const double h = 1.0 / static_cast<double>(state.range(0));
  auto grid = GridSpec::from_window(e.window, h, h);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dp_value_grid(e.problem, grid));
  }
}
BENCHMARK(BM_DpStill)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_HjbResidual(benchmark::State& state) {
  const auto e = gallery_oscillator();
  const auto controls = e.problem.control_set.sample(21);
  const Vec x = vec({1.3, 0.7});
  for (auto _ : state) {
    benchmark::DoNotOptimize(hjb_residual(e.candidate, e.problem, 0.0, x, controls, 1.0 / 32.0));
  }
}
BENCHMARK(BM_HjbResidual);

void BM_ExceptionalDistance(benchmark::State& state) {
  const auto e = gallery_sin_one_over_x();
  const auto& A = e.candidate.exceptional_set();
  A.distance(0.1, scalar_vec(0.3));  // build the index
  double t = -1.0;
  for (auto _ : state) {
    t = t > 1.0 ? -1.0 : t + 1e-3;
    benchmark::DoNotOptimize(A.distance(t, scalar_vec(0.3)));
  }
}
BENCHMARK(BM_ExceptionalDistance);

void BM_CheckHypothesesFuller(benchmark::State& state) {
  const auto e = gallery_fuller();
  const auto spec = e.check_spec(1.0 / 16.0, 3.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(check_hypotheses(e.candidate, e.problem, spec));
  }
}
BENCHMARK(BM_CheckHypothesesFuller)->Unit(benchmark::kMillisecond)->Iterations(2);

}  // namespace

BENCHMARK_MAIN();

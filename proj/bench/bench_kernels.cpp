// Parallel kernels against their serial references.

#include "esrlab/fitting.hpp"
#include "esrlab/spectra.hpp"
#include "esrlab/synthetic.hpp"

#include <benchmark/benchmark.h>

using namespace esrlab;

namespace {

SpinSystem v2plus() {
  SpinSystem sys;
  sys.s = HalfInteger::from_twice(3);
  sys.i = HalfInteger::from_twice(7);
  sys.g = 2.09;
  sys.d_ghz = 3.1;
  sys.e_ghz = 1.9;
  sys.a_ghz = 2.7;
  return sys;
}

SpinFitProblem v2plus_problem() {
  const auto truth = v2plus();
  SpinFitProblem pr;
  PointNoise noise;
  noise.noise_ghz = 0.05;
  pr.points = points_on_principal_lines(truth, {0.8, 0.9, 1.0, 1.1, 1.2, 1.3, 1.4, 1.5}, noise);
  pr.base = truth;
  pr.lines = LineSelection::principal;
  for (auto p : {SpinParameter::g, SpinParameter::e, SpinParameter::d, SpinParameter::a})
    pr.free.push_back(default_bounds(p));
  return pr;
}

void BM_sweep(benchmark::State& state) {
  const auto sys = v2plus();
  const auto grid = linear_grid(0.0, 1.0, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(sweep(sys, grid));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_sweep_reference(benchmark::State& state) {
  const auto sys = v2plus();
  const auto grid = linear_grid(0.0, 1.0, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(sweep_reference(sys, grid));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_fit(benchmark::State& state) {
  const auto pr = v2plus_problem();
  MultiStartOptions opts;
  opts.starts = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(fit_spin_parameters(pr, opts));
}

void BM_fit_reference(benchmark::State& state) {
  const auto pr = v2plus_problem();
  MultiStartOptions opts;
  opts.starts = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(fit_spin_parameters_reference(pr, opts));
}

}  // namespace

BENCHMARK(BM_sweep)->Arg(500)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_sweep_reference)->Arg(500)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_fit)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime()->Iterations(1);
BENCHMARK(BM_fit_reference)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime()->Iterations(1);

BENCHMARK_MAIN();

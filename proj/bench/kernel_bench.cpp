// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include "llgrid/kernels.hpp"
#include "llgrid/random_fields.hpp"

namespace {

using namespace llgrid;

Field bench_field(int M) {
  gen::Rng rng(11);
  return gen::random_density(GridSpec(1, 2, M, 0.0, 1.0), rng);
}

template <double (*Kernel)(const GridSpec&, std::span<const double>)>
void difference_energy(benchmark::State& state) {
  const Field f = bench_field(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(f.grid, f.values));
  state.SetItemsProcessed(state.iterations() * f.values.size());
}

template <void (*Kernel)(const GridSpec&, std::span<const double>, const BallStencil&,
                         std::span<double>)>
void ball_sums(benchmark::State& state) {
  const Field f = bench_field(static_cast<int>(state.range(0)));
  const BallStencil st = make_ball_stencil(f.grid.axes(), 4 * f.grid.spacing(), f.grid.spacing());
  std::vector<double> out(f.values.size());
  for (auto _ : state) {
    Kernel(f.grid, f.values, st, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * f.values.size());
}

template <void (*Kernel)(const GridSpec&, std::span<const double>, const kernels::AxisMask&,
                         std::span<double>)>
void axis_sums(benchmark::State& state) {
  const Field f = bench_field(static_cast<int>(state.range(0)));
  kernels::AxisMask mask{{1, 0}};
  std::vector<double> out(f.grid.points());
  for (auto _ : state) {
    Kernel(f.grid, f.values, mask, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * f.values.size());
}

BENCHMARK(difference_energy<kernels::serial::difference_energy>)->Arg(128)->Arg(512)->Arg(1024);
BENCHMARK(difference_energy<kernels::parallel::difference_energy>)->Arg(128)->Arg(512)->Arg(1024);
BENCHMARK(ball_sums<kernels::serial::ball_sums>)->Arg(64)->Arg(128);
BENCHMARK(ball_sums<kernels::parallel::ball_sums>)->Arg(64)->Arg(128);
BENCHMARK(axis_sums<kernels::serial::axis_sums>)->Arg(512)->Arg(1024);
BENCHMARK(axis_sums<kernels::parallel::axis_sums>)->Arg(512)->Arg(1024);

}  // namespace

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include <cmath>

#include "stablefield/coeffs.hpp"
#include "stablefield/montecarlo.hpp"
#include "stablefield/normalizer.hpp"
#include "stablefield/stable.hpp"
#include "stablefield/weights.hpp"

using namespace stablefield;

static void BM_StablePdf(benchmark::State& state) {
  const StableLaw law(1.5, 1.0, state.range(0) / 10.0);
  double x = -5.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(law.pdf(x));
    x = x > 5.0 ? -5.0 : x + 0.37;
  }
}
BENCHMARK(BM_StablePdf)->Arg(0)->Arg(5);

static void BM_StableCdf(benchmark::State& state) {
  const StableLaw law(1.5, 1.0, state.range(0) / 10.0);
  double x = -5.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(law.cdf(x));
    x = x > 5.0 ? -5.0 : x + 0.37;
  }
}
BENCHMARK(BM_StableCdf)->Arg(0)->Arg(5);

static void BM_StableSample(benchmark::State& state) {
  const StableLaw law(state.range(0) / 10.0, 1.0, 0.0);
  RngStream rng(1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(law.sample(rng));
}
BENCHMARK(BM_StableSample)->Arg(10)->Arg(15)->Arg(20);

static void BM_WeightsExample1(benchmark::State& state) {
  const auto model = CoefficientModel::doubly_geometric(0.5, 0.5);
  const auto region = regions::cube(2, state.range(0));
  const auto one = SlowVary::constant(1.0);
  for (auto _ : state) benchmark::DoNotOptimize(build_weights(model, region, 1.5, one));
}
BENCHMARK(BM_WeightsExample1)->Arg(32)->Arg(256)->Unit(benchmark::kMillisecond);

static void BM_WeightsIsotropic(benchmark::State& state) {
  const auto model = CoefficientModel::isotropic(1.5, 2);
  const double c[] = {1.0, 1.0};
  const auto region = regions::symmetric_box(c, state.range(0));
  const auto one = SlowVary::constant(1.0);
  WeightOptions options;
  options.margin_factor = 0.5;
  for (auto _ : state) benchmark::DoNotOptimize(build_weights(model, region, 1.8, one, options));
}
BENCHMARK(BM_WeightsIsotropic)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

static void BM_SolveBnPareto(benchmark::State& state) {
  const auto model = CoefficientModel::doubly_geometric(0.5, 0.5);
  const auto L = SlowVary::pareto_canonical(1.5);
  const auto field = build_weights(model, regions::cube(2, state.range(0)), 1.5, L);
  for (auto _ : state) benchmark::DoNotOptimize(solve_Bn(field, 1.5, L));
}
BENCHMARK(BM_SolveBnPareto)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

static void BM_SimulateExample1(benchmark::State& state) {
  const auto model = CoefficientModel::doubly_geometric(0.5, 0.5);
  const auto one = SlowVary::constant(1.0);
  const auto field = build_weights(model, regions::cube(2, 16), 1.5, one);
  SimPlan plan;
  plan.field = &field;
  plan.innovations = InnovationModel::exact_stable(StableLaw(1.5));
  plan.B_n = solve_Bn(field, 1.5, one).B_n;
  plan.replicates = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(simulate(plan));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateExample1)->Arg(1000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

#include "cml/interactions.hpp"
#include "cml/meanfield.hpp"
#include "cml/simulator.hpp"
#include "cml/transfer_ops.hpp"

#include <benchmark/benchmark.h>

using namespace cml;

namespace {

SimulationSpec rigid_circle(std::size_t particles, Arithmetic arithmetic) {
  SimulationSpec s;
  s.particles = particles;
  s.rule.epsilon = Rational(1, 100);
  s.rule.gamma = 0;
  s.arithmetic = arithmetic;
  s.record_series = false;
  return s;
}

}  // namespace

static void BM_StepFloat(benchmark::State& state) {
  auto spec = rigid_circle(static_cast<std::size_t>(state.range(0)), Arithmetic::float64());
  auto cfg = random_configuration(spec.space, spec.particles, 1);
  for (auto _ : state) {
    cfg = step(cfg, spec);
    benchmark::DoNotOptimize(cfg);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_StepFloat)->Arg(2)->Arg(16)->Arg(128);

static void BM_StepRational(benchmark::State& state) {
  auto spec = rigid_circle(static_cast<std::size_t>(state.range(0)), Arithmetic::rational());
  const auto start = random_exact_configuration(spec.space, spec.particles, 1);
  auto cfg = start;
  std::size_t n = 0;
  for (auto _ : state) {
    // denominators grow while no cluster forms; restart periodically
    if (++n % 64 == 0) cfg = start;
    cfg = step(cfg, spec);
    benchmark::DoNotOptimize(cfg);
  }
}
BENCHMARK(BM_StepRational)->Arg(2)->Arg(16);

static void BM_Clusters(benchmark::State& state) {
  const Space space{Topology::circle, 1};
  auto cfg = random_configuration(space, static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(epsilon_chain_clusters(cfg, space, 0.01));
}
BENCHMARK(BM_Clusters)->Arg(8)->Arg(64)->Arg(512);

static void BM_SyncEnsemble(benchmark::State& state) {
  auto spec = rigid_circle(2, Arithmetic::rational());
  for (auto _ : state) benchmark::DoNotOptimize(ensemble(spec, 100, 2024, 1).summary);
}
BENCHMARK(BM_SyncEnsemble)->Unit(benchmark::kMillisecond);

static void BM_UlamBuild(benchmark::State& state) {
  const auto map = maps::tripling();
  for (auto _ : state) benchmark::DoNotOptimize(ulam(map, static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_UlamBuild)->Arg(243)->Arg(2187)->Unit(benchmark::kMicrosecond);

static void BM_UlamPush(benchmark::State& state) {
  const auto bins = static_cast<std::size_t>(state.range(0));
  const auto op = ulam(maps::tripling(), bins);
  auto mu = GridMeasure::lebesgue(bins);
  for (auto _ : state) {
    mu = op.push(mu);
    benchmark::DoNotOptimize(mu);
  }
}
BENCHMARK(BM_UlamPush)->Arg(243)->Arg(6561);

static void BM_ExactPushTripling(benchmark::State& state) {
  const auto mus = random_signed_measures(243, 16, 1);
  const auto map = maps::tripling();
  std::size_t k = 0;
  for (auto _ : state) benchmark::DoNotOptimize(exact_push(map, mus[k++ % mus.size()]));
}
BENCHMARK(BM_ExactPushTripling)->Unit(benchmark::kMicrosecond);

static void BM_InvariantMeasure(benchmark::State& state) {
  const auto op = ulam(compose(maps::tripling(), maps::tent()), static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(invariant_measure(op, 1e-10));
}
BENCHMARK(BM_InvariantMeasure)->Arg(300)->Arg(3000)->Unit(benchmark::kMillisecond);

static void BM_MeanFieldStep(benchmark::State& state) {
  MeanFieldParams p;
  auto mu = GridMeasure::lebesgue(256, Boundary::periodic);
  for (auto _ : state) benchmark::DoNotOptimize(mean_field_step(mu, p, static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_MeanFieldStep)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();

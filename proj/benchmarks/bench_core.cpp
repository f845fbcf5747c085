#include <benchmark/benchmark.h>

#include "bqlab/norms.hpp"
#include "bqlab/profiles.hpp"
#include "bqlab/solver.hpp"

using namespace bqlab;

namespace {

Field packet(const Grid& g) { return make_profile(g, {"packet", 0.3, 4.0, 0.0, 1.5}); }

void BM_Transform(benchmark::State& st) {
  const Grid g = make_grid(1, 1024.0, std::size_t(st.range(0)));
  const Field f = packet(g);
  for (auto _ : st) benchmark::DoNotOptimize(spectrum_of(Field::from_physical(g, samples_of(f))));
}
BENCHMARK(BM_Transform)->RangeMultiplier(4)->Range(1 << 10, 1 << 16);

void BM_DealiasedPower(benchmark::State& st) {
  const Grid g = make_grid(1, 1024.0, std::size_t(st.range(0)));
  const Field f = packet(g);
  for (auto _ : st) benchmark::DoNotOptimize(pointwise_power(f, 4));
}
BENCHMARK(BM_DealiasedPower)->RangeMultiplier(4)->Range(1 << 10, 1 << 14);

void BM_ModulationNorm(benchmark::State& st) {
  const Grid g = make_grid(1, 1024.0, std::size_t(st.range(0)));
  const WindowBank bank = build_windows(g);
  const Field f = packet(g);
  for (auto _ : st) benchmark::DoNotOptimize(modulation_norm(f, {5.0, 1.0, 0.0}, bank));
}
BENCHMARK(BM_ModulationNorm)->Arg(2048)->Arg(8192);

void BM_Picard(benchmark::State& st) {
  const Grid g = make_grid(1, 256.0, 2048);
  const WindowBank bank = build_windows(g);
  SolverConfig cfg;
  cfg.pp = {1, 4, 5.0, 1.0, 0.0};
  cfg.T = 5.0;
  cfg.M = std::size_t(st.range(0));
  cfg.sample_every = cfg.M;
  const StatePair z0(packet(g), Field::zeros(g));
  for (auto _ : st) benchmark::DoNotOptimize(picard_solve(z0, cfg, bank));
}
BENCHMARK(BM_Picard)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

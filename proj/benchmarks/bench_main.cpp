#include <benchmark/benchmark.h>

#include "pmiflow/fields.hpp"
#include "pmiflow/pmi.hpp"
#include "pmiflow/random.hpp"
#include "pmiflow/solvers.hpp"

using namespace pmiflow;

namespace {

GmmField mixture(std::size_t n, std::size_t k) {
  std::vector<GaussComponent> comps;
  const auto means = sample_standard_normal(n, RngSeed{3}, k);
  for (const auto& m : means) comps.push_back({1.0 / static_cast<double>(k), m, StateVec(n, 0.2)});
  return GmmField(std::move(comps));
}

void BM_GmmVelocity(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const GmmField f = mixture(n, 8);
  const StateVec z = sample_standard_normal(n, RngSeed{1}, 1).front();
  for (auto _ : state) benchmark::DoNotOptimize(f.velocity(z, 0.4));
}
BENCHMARK(BM_GmmVelocity)->Arg(16)->Arg(256)->Arg(4096);

void BM_Inversion(benchmark::State& state) {
  const auto kind = static_cast<SolverKind>(state.range(0));
  const GmmField f = mixture(64, 4);
  const StateVec z = sample_standard_normal(64, RngSeed{1}, 1).front();
  const auto grid = make_uniform_grid(30);
  for (auto _ : state) benchmark::DoNotOptimize(run_inversion(f, z, grid, kind));
  state.SetLabel(std::string(to_string(kind)));
}
BENCHMARK(BM_Inversion)->DenseRange(0, 3);

void BM_PmiInversion(benchmark::State& state) {
  const auto kind = static_cast<SolverKind>(state.range(0));
  const GmmField f = mixture(64, 4);
  const StateVec z = sample_standard_normal(64, RngSeed{1}, 1).front();
  const auto grid = make_uniform_grid(30);
  for (auto _ : state) benchmark::DoNotOptimize(pmi_invert(f, z, grid, kind, CorrectionConfig{}));
  state.SetLabel(std::string(to_string(kind)));
}
BENCHMARK(BM_PmiInversion)->DenseRange(0, 3);

void BM_PmiCorrect(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto vs = sample_standard_normal(n, RngSeed{2}, 3);
  RunningAverage avg;
  avg = running_average_update(avg, vs[1], 0.1);
  avg = running_average_update(avg, vs[2], 0.1);
  const CorrectionConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(pmi_correct(vs[0], avg, 0.5, cfg));
}
BENCHMARK(BM_PmiCorrect)->Arg(16)->Arg(4096)->Arg(65536);

}  // namespace
BENCHMARK_MAIN();

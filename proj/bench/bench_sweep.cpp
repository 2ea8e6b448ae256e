// Serial reference vs OpenMP kernels. Set OMP_NUM_THREADS to vary the team.
#include <benchmark/benchmark.h>

#include <cmath>

#include "liesys/invariants.hpp"
#include "liesys/sweep.hpp"
#include "liesys/systems.hpp"

using namespace liesys;

namespace {

const SystemDef& pinney_triple_system() {
  static const SystemDef def = pinney_triple(FrequencyProfile::sinusoidal(), 1.0);
  return def;
}

template <bool Parallel>
void BM_verify_algebra(benchmark::State& st) {
  const auto& def = pinney_triple_system();
  const auto probes = def.sampler().sample(static_cast<std::size_t>(st.range(0)), 1);
  for (auto _ : st) {
    const auto r = Parallel ? parallel::verify_algebra(def.generators(), StructureConstants::sl2(), probes, 1e-9)
                            : serial::verify_algebra(def.generators(), StructureConstants::sl2(), probes, 1e-9);
    benchmark::DoNotOptimize(r.worst_residual);
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <bool Parallel>
void BM_evaluate(benchmark::State& st) {
  const auto& def = pinney_triple_system();
  std::vector<State> points;
  for (const auto& p : def.sampler().sample(static_cast<std::size_t>(st.range(0)), 2)) points.push_back(p);
  const auto f = [](const State& s) {
    const auto inv = ermakov_pair_invariants(s, 1.0);
    return inv.I1 + inv.I2 + inv.W;
  };
  for (auto _ : st) {
    const auto r = Parallel ? parallel::evaluate(points, f) : serial::evaluate(points, f);
    benchmark::DoNotOptimize(r.values.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <bool Parallel>
void BM_integrate_ensemble(benchmark::State& st) {
  const auto def = ermakov(FrequencyProfile::sinusoidal());
  std::vector<State> states;
  for (const auto& p : def.sampler().sample(static_cast<std::size_t>(st.range(0)), 3)) states.push_back(p);
  const auto o = def.integrator_options();
  for (auto _ : st) {
    const auto r = Parallel ? parallel::integrate_ensemble(def.as_rhs(), states, 0.0, 10.0, o)
                            : serial::integrate_ensemble(def.as_rhs(), states, 0.0, 10.0, o);
    benchmark::DoNotOptimize(r.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

}  // namespace

BENCHMARK(BM_verify_algebra<false>)->Name("verify_algebra/serial")->Arg(1000)->Arg(10000);
BENCHMARK(BM_verify_algebra<true>)->Name("verify_algebra/omp")->Arg(1000)->Arg(10000)->UseRealTime();
BENCHMARK(BM_evaluate<false>)->Name("evaluate/serial")->Arg(100000);
BENCHMARK(BM_evaluate<true>)->Name("evaluate/omp")->Arg(100000)->UseRealTime();
BENCHMARK(BM_integrate_ensemble<false>)->Name("integrate_ensemble/serial")->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_integrate_ensemble<true>)->Name("integrate_ensemble/omp")->Arg(16)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();

// Microbenchmarks for the hot paths: attachment, snapshot advance, walk
// sampling, and the exit-distribution solvers. Run with --benchmark_filter
// to pick one; the defaults keep each case under a few seconds.

#include <benchmark/benchmark.h>

#include "tanglesim/rng.hpp"
#include "tanglesim/simulator.hpp"
#include "tanglesim/tangle.hpp"
#include "tanglesim/walk.hpp"

namespace {

using namespace tanglesim;

// Uniform attachments over a sliding window of recent vertices, which gives
// the wide, shallow shape the simulator produces under load.
Tangle grown_tangle(std::uint32_t n, std::uint64_t seed) {
  Tangle t;
  Rng rng(seed);
  for (std::uint32_t i = 1; i < n; ++i) {
    const VertexId lo = i > 16 ? i - 16 : 0;
    const VertexId a = lo + static_cast<VertexId>(uniform_below(rng, i - lo));
    const VertexId b = lo + static_cast<VertexId>(uniform_below(rng, i - lo));
    t.attach(a, b, static_cast<double>(i), 0, i);
  }
  return t;
}

void BM_Attach(benchmark::State& state) {
  const auto n = static_cast<std::uint32_t>(state.range(0));
  for (auto _ : state) {
    Tangle t = grown_tangle(n, 7);
    benchmark::DoNotOptimize(t.size());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Attach)->Arg(1000)->Arg(10000);

void BM_SnapshotAdvance(benchmark::State& state) {
  Tangle t = grown_tangle(20000, 7);
  double cutoff = 0.0;
  for (auto _ : state) {
    cutoff = cutoff >= 19000.0 ? 1.0 : cutoff + 1.0;
    benchmark::DoNotOptimize(t.snapshot(cutoff, 0.0).size());
  }
}
BENCHMARK(BM_SnapshotAdvance);

void BM_SampleWalk(benchmark::State& state) {
  Tangle t = grown_tangle(2000, 11);
  const View view = t.snapshot(1999.0, 0.0);
  const WalkParams wp{state.range(0) == 0 ? 0.01 : 0.5, 1.0 / 3.0,
                      WalkStart::kGenesis};
  Rng rng(3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_walk(view, wp, rng));
  }
}
BENCHMARK(BM_SampleWalk)->Arg(0)->Arg(1);

void BM_ExitSolve(benchmark::State& state) {
  const auto n = static_cast<std::uint32_t>(state.range(0));
  Tangle t = grown_tangle(n, 13);
  const View view = t.snapshot(static_cast<double>(n), 0.0);
  const WalkParams wp{0.01, 1.0 / 3.0, WalkStart::kGenesis};
  for (auto _ : state) {
    // 400 stays on the dense elimination path, 4000 exercises Gauss-Seidel.
    benchmark::DoNotOptimize(exit_distribution_exact(view, wp).total());
  }
}
BENCHMARK(BM_ExitSolve)->Arg(400)->Arg(4000);

void BM_ExitSolveWarm(benchmark::State& state) {
  Tangle t = grown_tangle(6000, 17);
  const WalkParams wp{0.01, 1.0 / 3.0, WalkStart::kGenesis};
  ExitSolver solver;
  double cutoff = 512.0;
  for (auto _ : state) {
    cutoff = cutoff >= 6000.0 ? 512.0 : cutoff + 8.0;
    const View view = t.snapshot(cutoff, 0.0);
    benchmark::DoNotOptimize(solver.solve(view, wp).total());
  }
}
BENCHMARK(BM_ExitSolveWarm);

void BM_SimulatorRun(benchmark::State& state) {
  SimConfig cfg;
  cfg.lambda = 20.0;
  cfg.h = 1.0;
  cfg.q = 1.0 / 3.0;
  cfg.alpha = 0.01;
  cfg.m0 = 10;
  cfg.k_reattach = 20.0;
  cfg.t_end = 20.0;
  std::uint64_t i = 0;
  for (auto _ : state) {
    cfg.seed = derive_seed(1, i++);
    benchmark::DoNotOptimize(run(cfg).records.size());
  }
}
BENCHMARK(BM_SimulatorRun);

}  // namespace

BENCHMARK_MAIN();

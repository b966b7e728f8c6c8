#include <benchmark/benchmark.h>

#include <cqlab/diffusion.hpp>
#include <cqlab/dynamics.hpp>
#include <cqlab/fft.hpp>
#include <cqlab/geometry.hpp>
#include <cqlab/reconstruct.hpp>

using namespace cqlab;

static void BM_FftForward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Fft fft(n);
  ComplexVector in = ComplexVector::Random(static_cast<Eigen::Index>(n)), out(static_cast<Eigen::Index>(n));
  for (auto _ : state) {
    fft.forward(in, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FftForward)->RangeMultiplier(4)->Range(128, 8192);

static void BM_SplitStep(benchmark::State& state) {
  const Grid grid(static_cast<std::size_t>(state.range(0)), -16.0, 16.0, true);
  const SplitStepPropagator prop(grid, PotentialSpec::harmonic(1.0), PhysicsParams{});
  ComplexVector psi = realize(grid, GaussianParams{0.5, 0.2, 0.5}).amplitudes();
  for (auto _ : state) {
    prop.advance(psi, 0.0, 1e-3, 100);
    benchmark::DoNotOptimize(psi.data());
  }
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_SplitStep)->Arg(512)->Arg(2048);

static void BM_ReconstructSolve(benchmark::State& state) {
  const OperatorTriple ops = build_operators(static_cast<int>(state.range(0)), PhysicsParams{},
                                             PotentialSpec::polynomial({0.0, 0.0, 0.5, 0.0, 0.05}));
  for (auto _ : state) benchmark::DoNotOptimize(solve_hamiltonian(ops, PhysicsParams{}));
}
BENCHMARK(BM_ReconstructSolve)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_BrownianWalk(benchmark::State& state) {
  DiffusionConfig cfg;
  cfg.substeps = static_cast<int>(state.range(0));
  std::uint64_t w = 0;
  for (auto _ : state) benchmark::DoNotOptimize(brownian_walk(0.0, cfg, w++));
}
BENCHMARK(BM_BrownianWalk)->Arg(1)->Arg(8)->Arg(64);

static void BM_StateDiffusion(benchmark::State& state) {
  const Grid grid(512, -16.0, 16.0, true);
  const LatticeSpec lattice{0.5, 4.0, 0.0, 0.05};
  const Superposition s = random_superposition(grid, lattice, 1, 0);
  DiffusionConfig cfg;
  cfg.n_walkers = static_cast<std::size_t>(state.range(0));
  cfg.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(simulate_state_diffusion(s.state, cfg, lattice));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_StateDiffusion)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();

// Serial reference loops against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include "dhrad/dhrad.hpp"

using namespace dhrad;

namespace
{

kernels::Exec exec_of(const benchmark::State &state)
{
  return state.range(1) ? kernels::Exec::parallel : kernels::Exec::serial;
}

void BM_SigmaSweepDense(benchmark::State &state)
{
  Problem p = gen_dense(state.range(0), 1);
  StateSpace ss = full_state_space(p.system, TransferKind::rj, p.restriction);
  auto xs = kernels::linspace(0, 10, 256);
  for (auto _ : state)
    benchmark::DoNotOptimize(kernels::sigma_sweep(ss, xs, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * Index(xs.size()));
}

void BM_SigmaSweepSparse(benchmark::State &state)
{
  Problem p = gen_sparse(state.range(0), 1);
  auto solver = make_solver(p.system);
  FullTransfer tf(p.system, TransferKind::rj, p.restriction, *solver);
  auto xs = kernels::linspace(0, 10, 64);
  for (auto _ : state)
  {
    solver->clear_cache();
    benchmark::DoNotOptimize(kernels::sigma_sweep(tf, xs, exec_of(state)));
  }
  state.SetItemsProcessed(state.iterations() * Index(xs.size()));
}

void BM_StructuredSpectra(benchmark::State &state)
{
  Problem p = gen_dense(state.range(0), 2);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        sample_structured_spectra(p.system, p.restriction.B, 1e-3, 64, 7, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * 64);
}

}  // namespace

BENCHMARK(BM_SigmaSweepDense)->ArgsProduct({{20, 80}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SigmaSweepSparse)->ArgsProduct({{2000}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_StructuredSpectra)->ArgsProduct({{40, 100}, {0, 1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

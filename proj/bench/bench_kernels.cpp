#include <benchmark/benchmark.h>

#include <numeric>

#include "nmfsel/grouplasso.hpp"
#include "nmfsel/kernels.hpp"
#include "nmfsel/moments.hpp"
#include "nmfsel/philox.hpp"
#include "nmfsel/synth.hpp"

using namespace nmfsel;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  PhiloxStream g(seed, stream_id(StreamTag::test, 0));
  Matrix m(r, c);
  for (auto& v : m.data()) v = g.normal();
  return m;
}

void BM_MomentSumsParallel(benchmark::State& state) {
  const Matrix V = random_matrix(static_cast<std::size_t>(state.range(0)),
                                 static_cast<std::size_t>(state.range(1)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::moment_sums(V));
  state.SetItemsProcessed(state.iterations() * state.range(1));
}

void BM_MomentSumsSerial(benchmark::State& state) {
  const Matrix V = random_matrix(static_cast<std::size_t>(state.range(0)),
                                 static_cast<std::size_t>(state.range(1)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::moment_sums_serial(V));
  state.SetItemsProcessed(state.iterations() * state.range(1));
}

void BM_MatmulParallel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = random_matrix(n, n, 2), b = random_matrix(n, n, 3);
  for (auto _ : state) benchmark::DoNotOptimize(a * b);
}

void BM_MatmulSerial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = random_matrix(n, n, 2), b = random_matrix(n, n, 3);
  for (auto _ : state) benchmark::DoNotOptimize(matmul_serial(a, b));
}

void BM_RowsparseParallel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix G = random_matrix(n, n, 4), B = random_matrix(n, n, 5);
  std::vector<std::size_t> rows(n / 5);
  std::iota(rows.begin(), rows.end(), 0);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::rowsparse_product(G, B, rows));
}

void BM_RowsparseSerial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix G = random_matrix(n, n, 4), B = random_matrix(n, n, 5);
  std::vector<std::size_t> rows(n / 5);
  std::iota(rows.begin(), rows.end(), 0);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::rowsparse_product_serial(G, B, rows));
}

void BM_SwimmerSolve(benchmark::State& state) {
  const Matrix m2 = m2_hat_fast(swimmer().V).m2_hat;
  GroupLassoProblem pr{m2, m2, static_cast<double>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(solve(pr, {}));
}

}  // namespace

BENCHMARK(BM_MomentSumsParallel)->Args({20, 10000})->Args({50, 10000})->Args({50, 100000});
BENCHMARK(BM_MomentSumsSerial)->Args({20, 10000})->Args({50, 10000})->Args({50, 100000});
BENCHMARK(BM_MatmulParallel)->Arg(64)->Arg(220);
BENCHMARK(BM_MatmulSerial)->Arg(64)->Arg(220);
BENCHMARK(BM_RowsparseParallel)->Arg(50)->Arg(220);
BENCHMARK(BM_RowsparseSerial)->Arg(50)->Arg(220);
BENCHMARK(BM_SwimmerSolve)->Arg(1)->Arg(1000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

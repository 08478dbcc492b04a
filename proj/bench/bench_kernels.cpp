// Serial reference vs OpenMP kernels. Sizes follow the training shapes
// (batch x width) up to larger sizes where threading pays off.

#include <benchmark/benchmark.h>

#include "uno/kernels.hpp"
#include "uno/rng.hpp"

namespace {

uno::Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  uno::Rng rng(seed);
  uno::Matrix m(r, c);
  for (double& v : m.values()) v = rng.normal();
  return m;
}

template <void (*Gemm)(const uno::Matrix&, const uno::Matrix&, uno::Matrix&)>
void BM_gemm_nt(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_matrix(n, n, 1), b = random_matrix(n, n, 2);
  uno::Matrix c(n, n);
  for (auto _ : state) {
    Gemm(a, b, c);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n * n * n));
}

template <void (*Gemm)(const uno::Matrix&, const uno::Matrix&, uno::Matrix&)>
void BM_gemm_tn(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_matrix(n, n, 1), b = random_matrix(n, n, 2);
  uno::Matrix c(n, n);
  for (auto _ : state) {
    Gemm(a, b, c);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n * n * n));
}

template <std::vector<double> (*Xent)(const uno::Matrix&, const uno::Matrix&, double,
                                      uno::Matrix&)>
void BM_softmax_xent(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const auto x = random_matrix(rows, 64, 3);
  uno::Matrix t(rows, 64);
  for (std::size_t i = 0; i < rows; ++i) t(i, i % 64) = 1.0;
  uno::Matrix p(rows, 64);
  for (auto _ : state) benchmark::DoNotOptimize(Xent(x, t, 10.0, p));
}

template <void (*Norm)(const uno::Matrix&, double, uno::Matrix&, std::vector<double>&)>
void BM_l2_normalize(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const auto x = random_matrix(rows, 128, 4);
  uno::Matrix y(rows, 128);
  std::vector<double> norms;
  for (auto _ : state) {
    Norm(x, 1e-12, y, norms);
    benchmark::DoNotOptimize(y.data());
  }
}

}  // namespace

BENCHMARK(BM_gemm_nt<uno::kernels::serial::gemm_nt>)->Name("gemm_nt/serial")->Arg(64)->Arg(256)->Arg(512);
BENCHMARK(BM_gemm_nt<uno::kernels::omp::gemm_nt>)->Name("gemm_nt/omp")->Arg(64)->Arg(256)->Arg(512);
BENCHMARK(BM_gemm_tn<uno::kernels::serial::gemm_tn>)->Name("gemm_tn/serial")->Arg(64)->Arg(256)->Arg(512);
BENCHMARK(BM_gemm_tn<uno::kernels::omp::gemm_tn>)->Name("gemm_tn/omp")->Arg(64)->Arg(256)->Arg(512);
BENCHMARK(BM_softmax_xent<uno::kernels::serial::softmax_xent_rows>)->Name("softmax_xent/serial")->Arg(128)->Arg(8192);
BENCHMARK(BM_softmax_xent<uno::kernels::omp::softmax_xent_rows>)->Name("softmax_xent/omp")->Arg(128)->Arg(8192);
BENCHMARK(BM_l2_normalize<uno::kernels::serial::l2_normalize_rows>)->Name("l2_normalize/serial")->Arg(128)->Arg(8192);
BENCHMARK(BM_l2_normalize<uno::kernels::omp::l2_normalize_rows>)->Name("l2_normalize/omp")->Arg(128)->Arg(8192);

BENCHMARK_MAIN();

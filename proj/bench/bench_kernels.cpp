// Serial reference against the OpenMP variant of each kernel. Run with
// OMP_NUM_THREADS set to compare; on one core the two should match closely.

#include <benchmark/benchmark.h>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "isoctl/domain.hpp"
#include "isoctl/kernels.hpp"
#include "isoctl/spectral.hpp"

using namespace isoctl;
using kernels::Backend;

namespace {

Backend backend_of(const benchmark::State& state) { return state.range(1) ? Backend::OpenMP : Backend::Serial; }

std::vector<double> random_symmetric(std::size_t n) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  std::vector<double> a(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) a[i * n + j] = a[j * n + i] = normal(rng);
  return a;
}

void BM_SymEig(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_symmetric(n);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::sym_eig(a, n, true, backend_of(state)));
  state.SetLabel(state.range(1) ? "openmp" : "serial");
}

void BM_ProjectResum(benchmark::State& state) {
  const auto samples = static_cast<std::size_t>(state.range(0));
  const std::size_t modes = samples / 4;
  std::vector<double> basis(samples * modes), w(samples, 1.0 / samples);
  for (std::size_t i = 0; i < samples; ++i)
    for (std::size_t k = 0; k < modes; ++k) basis[i * modes + k] = std::cos(0.01 * static_cast<double>(i * k));
  std::vector<std::complex<double>> psi(samples, {1.0, 0.5}), coeffs(modes), out(samples);
  for (auto _ : state) {
    kernels::project(basis, samples, modes, w, psi, coeffs, backend_of(state));
    kernels::resum(basis, samples, modes, coeffs, out, backend_of(state));
    benchmark::DoNotOptimize(out.data());
  }
  state.SetLabel(state.range(1) ? "openmp" : "serial");
}

void BM_LowestEigenvalues(benchmark::State& state) {
  const auto op = assemble(discretize_nodes(eight_graph(), static_cast<std::size_t>(state.range(0))), nullptr);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::lowest_eigenvalues(op.chains, 16, 1e-12, backend_of(state)));
  state.SetLabel(state.range(1) ? "openmp" : "serial");
}

}  // namespace

BENCHMARK(BM_SymEig)->ArgsProduct({{128, 512}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ProjectResum)->ArgsProduct({{1024, 4096}, {0, 1}})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_LowestEigenvalues)->ArgsProduct({{1025, 8193}, {0, 1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

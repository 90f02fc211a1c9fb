// Serial reference kernels against their OpenMP counterparts.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "bbp/bbp_measurement.hpp"
#include "bbp/kernels.hpp"

using namespace bbp;

namespace {

std::vector<Complex> random_complex(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<Complex> v(n);
  for (auto& z : v) z = Complex(g(rng), g(rng));
  return v;
}

const SparseMatrix& q_delta_matrix() {
  static const SparseMatrix m = [] {
    auto basis = build_basis(4, 16);
    return build_q_delta(basis, QuadratureSpec{{0.5, Complex(0.0, 0.5)}, {1.0, 2.0}, 0.1}).matrix.entries();
  }();
  return m;
}

template <bool Parallel>
void BM_csr_matvec(benchmark::State& state) {
  const auto& m = q_delta_matrix();
  const auto view = kernels::csr_view(m);
  const auto x = random_complex(static_cast<std::size_t>(m.rows()), 1);
  std::vector<Complex> y(x.size());
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::parallel::csr_matvec(view, x.data(), y.data());
    } else {
      kernels::serial::csr_matvec(view, x.data(), y.data());
    }
    benchmark::DoNotOptimize(y.data());
  }
}

template <bool Parallel>
void BM_projection(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  std::vector<double> vectors(n * n);
  for (auto& v : vectors) v = g(rng);
  const auto states = random_complex(n, 4);
  const double w = 1.0;
  std::vector<double> out(n);
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::parallel::projection_probabilities(vectors.data(), n, n, states.data(), 1, &w, out.data());
    } else {
      kernels::serial::projection_probabilities(vectors.data(), n, n, states.data(), 1, &w, out.data());
    }
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Parallel>
void BM_difference_mass(benchmark::State& state) {
  const std::size_t rows = static_cast<std::size_t>(state.range(0)), cols = 64;
  const auto a = random_complex(rows * cols, 5);
  std::vector<double> out(rows + cols - 1);
  for (auto _ : state) {
    std::fill(out.begin(), out.end(), 0.0);
    if constexpr (Parallel) {
      kernels::parallel::difference_mass(a.data(), rows, cols, 1.0, out.data());
    } else {
      kernels::serial::difference_mass(a.data(), rows, cols, 1.0, out.data());
    }
    benchmark::DoNotOptimize(out.data());
  }
}

}  // namespace

BENCHMARK(BM_csr_matvec<false>)->Name("csr_matvec/serial");
BENCHMARK(BM_csr_matvec<true>)->Name("csr_matvec/omp");
BENCHMARK(BM_projection<false>)->Name("projection/serial")->Arg(1000)->Arg(3000);
BENCHMARK(BM_projection<true>)->Name("projection/omp")->Arg(1000)->Arg(3000);
BENCHMARK(BM_difference_mass<false>)->Name("difference_mass/serial")->Arg(2000)->Arg(8000);
BENCHMARK(BM_difference_mass<true>)->Name("difference_mass/omp")->Arg(2000)->Arg(8000);

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include "odediscover/basis.hpp"
#include "odediscover/kernels.hpp"
#include "odediscover/rng.hpp"

using namespace odediscover;

namespace {

Mat random_states(Eigen::Index n, Eigen::Index m) {
    Mat x(n, m);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index k = 0; k < m; ++k) x(i, k) = rng::normal(1, std::uint64_t(k), std::uint64_t(i));
    return x;
}

kernels::Exponents exponents(const basis::MonomialBasis& b) { return {b.indices.begin(), b.indices.end()}; }

template <bool Parallel>
void BM_Library(benchmark::State& state) {
    const auto b = basis::enumerate_basis(6, 3);
    const Mat x = random_states(state.range(0), 6);
    const auto exps = exponents(b);
    for (auto _ : state) {
        Mat out = Parallel ? kernels::monomial_library_omp(exps, b.d, x) : kernels::monomial_library_serial(exps, b.d, x);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * b.size());
}

template <bool Parallel>
void BM_Trapezoid(benchmark::State& state) {
    const Mat x = random_states(state.range(0), 84);
    for (auto _ : state) {
        Mat out = Parallel ? kernels::cumulative_trapezoid_omp(x, 0.01) : kernels::cumulative_trapezoid_serial(x, 0.01);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * x.size());
}

}  // namespace

BENCHMARK(BM_Library<false>)->Name("library/serial")->Arg(1000)->Arg(8000);
BENCHMARK(BM_Library<true>)->Name("library/omp")->Arg(1000)->Arg(8000);
BENCHMARK(BM_Trapezoid<false>)->Name("trapezoid/serial")->Arg(1000)->Arg(8000);
BENCHMARK(BM_Trapezoid<true>)->Name("trapezoid/omp")->Arg(1000)->Arg(8000);

BENCHMARK_MAIN();

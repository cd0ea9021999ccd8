// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "svtas/kernels.hpp"

namespace k = svtas::kernels;

namespace {

std::vector<float> random_vec(std::size_t n, unsigned seed) {
    std::mt19937 g(seed);
    std::uniform_real_distribution<float> d(-1.0f, 1.0f);
    std::vector<float> v(n);
    for (auto& x : v) x = d(g);
    return v;
}

template <bool Parallel>
void bm_gemm(benchmark::State& state) {
    const auto n = std::size_t(state.range(0));
    const auto a = random_vec(n * n, 1), b = random_vec(n * n, 2);
    std::vector<float> c(n * n);
    for (auto _ : state) {
        if constexpr (Parallel) {
            k::omp::gemm(false, false, n, n, n, a.data(), b.data(), c.data(), false);
        } else {
            k::serial::gemm(false, false, n, n, n, a.data(), b.data(), c.data(), false);
        }
        benchmark::DoNotOptimize(c.data());
    }
    state.SetItemsProcessed(state.iterations() * std::int64_t(2 * n * n * n));
}

// One encoder block over a 32-frame chunk.
template <bool Parallel>
void bm_conv(benchmark::State& state) {
    k::Conv2dGeometry g;
    g.frames = 32;
    g.in_h = g.in_w = std::size_t(state.range(0));
    g.in_c = std::size_t(state.range(1));
    g.out_c = std::size_t(state.range(2));
    g.stride = 2;
    g.pad = 1;
    const auto in = random_vec(g.in_size(), 3), w = random_vec(g.weight_size(), 4), bias = random_vec(g.out_c, 5);
    std::vector<float> out(g.out_size());
    for (auto _ : state) {
        if constexpr (Parallel) {
            k::omp::conv2d_forward(g, in.data(), w.data(), bias.data(), out.data());
        } else {
            k::serial::conv2d_forward(g, in.data(), w.data(), bias.data(), out.data());
        }
        benchmark::DoNotOptimize(out.data());
    }
}

} // namespace

BENCHMARK(bm_gemm<false>)->Name("gemm/serial")->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(bm_gemm<true>)->Name("gemm/omp")->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(bm_conv<false>)->Name("conv/serial")->Args({48, 3, 16})->Args({24, 16, 32})->Args({12, 32, 64});
BENCHMARK(bm_conv<true>)->Name("conv/omp")->Args({48, 3, 16})->Args({24, 16, 32})->Args({12, 32, 64});

BENCHMARK_MAIN();

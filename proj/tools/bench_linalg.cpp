// Compares the OpenMP matmul kernels against the serial reference across the
// matrix sizes the encoder actually uses (desk scale up to BERT-base scale).

#include <benchmark/benchmark.h>

#include "ctk/linalg.hpp"
#include "ctk/prng.hpp"

namespace {

ctk::Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    ctk::Matrix m(rows, cols);
    ctk::SplitMix64 rng(seed);
    for (double& v : m.data) v = rng.next_normal();
    return m;
}

void bench_matmul_parallel(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    ctk::Matrix a = random_matrix(n, n, 1), b = random_matrix(n, n, 2), out;
    for (auto _ : state) {
        ctk::linalg::matmul(a, b, out);
        benchmark::DoNotOptimize(out.data.data());
        benchmark::ClobberMemory();
    }
}

void bench_matmul_serial(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    ctk::Matrix a = random_matrix(n, n, 1), b = random_matrix(n, n, 2), out;
    for (auto _ : state) {
        ctk::linalg::ref::matmul(a, b, out);
        benchmark::DoNotOptimize(out.data.data());
        benchmark::ClobberMemory();
    }
}

}  // namespace

BENCHMARK(bench_matmul_serial)->Arg(32)->Arg(64)->Arg(128)->Arg(256)->Arg(768);
BENCHMARK(bench_matmul_parallel)->Arg(32)->Arg(64)->Arg(128)->Arg(256)->Arg(768);

BENCHMARK_MAIN();

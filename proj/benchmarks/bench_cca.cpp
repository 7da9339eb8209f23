#include <benchmark/benchmark.h>

#include "xltag/cca.hpp"
#include "xltag/rng.hpp"

namespace xltag::bench {
namespace {

void BM_CanonicalCorrelation(benchmark::State &state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto d = static_cast<std::size_t>(state.range(1));
    Rng rng(5);
    Tensor x = Tensor::matrix(n, d), y = Tensor::matrix(n, d);
    for (double &v : x.data()) v = rng.normal();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) y.at(i, j) = x.at(i, (j + 1) % d) + 0.5 * rng.normal();
    for (auto _ : state) benchmark::DoNotOptimize(canonical_correlation(x, y));
}
BENCHMARK(BM_CanonicalCorrelation)->Args({1000, 16})->Args({5000, 64})->Args({20000, 128})->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace xltag::bench

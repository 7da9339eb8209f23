#include <benchmark/benchmark.h>

#include "fixtures.hpp"
#include "xltag/active.hpp"

namespace xltag::bench {
namespace {

void BM_Select(benchmark::State &state) {
    const auto strategy = static_cast<Strategy>(state.range(0));
    const auto sentences = static_cast<std::size_t>(state.range(1));
    Rng rng(7);
    const EmbeddingSpace space = random_space(2000, 16, rng);
    const AnnotationPool pool(random_corpus(sentences, 20, 2000, rng));
    TaggerShape shape;
    shape.input_dim = 16;
    shape.hidden = 8;
    shape.mlp_hidden = 8;
    const Tagger model(shape, TagSet::universal(), "bench", 8);
    const EntropyTable h = pool_entropies(model, space, pool);
    state.SetLabel(std::string(strategy_name(strategy)));
    for (auto _ : state) benchmark::DoNotOptimize(select(strategy, pool, h, rng));
}
BENCHMARK(BM_Select)
    ->ArgsProduct({{static_cast<int>(Strategy::token), static_cast<int>(Strategy::sentence),
                    static_cast<int>(Strategy::freq_type), static_cast<int>(Strategy::sum_type)},
                   {100, 1000}})
    ->Unit(benchmark::kMicrosecond);

void BM_PoolEntropies(benchmark::State &state) {
    Rng rng(9);
    const EmbeddingSpace space = random_space(2000, 16, rng);
    const AnnotationPool pool(random_corpus(static_cast<std::size_t>(state.range(0)), 20, 2000, rng));
    TaggerShape shape;
    shape.input_dim = 16;
    shape.hidden = 8;
    shape.mlp_hidden = 8;
    const Tagger model(shape, TagSet::universal(), "bench", 10);
    for (auto _ : state) benchmark::DoNotOptimize(pool_entropies(model, space, pool));
}
BENCHMARK(BM_PoolEntropies)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace xltag::bench

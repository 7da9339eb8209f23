#include <benchmark/benchmark.h>

#include "fixtures.hpp"
#include "xltag/trainer.hpp"

namespace xltag::bench {
namespace {

// One joint-loss forward and backward pass over a batch of one sentence.
void BM_SentenceForwardBackward(benchmark::State &state) {
    const auto length = static_cast<std::size_t>(state.range(0));
    const auto hidden = static_cast<std::size_t>(state.range(1));
    Rng rng(1);
    const EmbeddingSpace space = random_space(500, 32, rng);
    JointBatch batch{random_corpus(1, length, 500, rng), random_corpus(1, length, 500, rng)};
    TaggerShape shape;
    shape.input_dim = 32;
    shape.hidden = hidden;
    shape.mlp_hidden = 16;
    Tagger model(shape, TagSet::universal(), "bench", 2);
    for (auto _ : state) {
        ad::Graph g;
        const ad::Expr loss = joint_loss(g, model, space, batch, 1.0);
        g.backward(loss);
        benchmark::DoNotOptimize(g.value(loss)[0]);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * length));
}
BENCHMARK(BM_SentenceForwardBackward)->Args({10, 16})->Args({25, 16})->Args({25, 64})->Unit(benchmark::kMicrosecond);

void BM_TagSentence(benchmark::State &state) {
    const auto length = static_cast<std::size_t>(state.range(0));
    Rng rng(3);
    const EmbeddingSpace space = random_space(500, 32, rng);
    const TaggedCorpus c = random_corpus(1, length, 500, rng);
    TaggerShape shape;
    shape.input_dim = 32;
    shape.hidden = 32;
    shape.mlp_hidden = 16;
    Tagger model(shape, TagSet::universal(), "bench", 4);
    for (auto _ : state) {
        benchmark::DoNotOptimize(model.probabilities(space, c.sentences[0].tokens, Head::distant));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(length));
}
BENCHMARK(BM_TagSentence)->Arg(10)->Arg(50)->Unit(benchmark::kMicrosecond);

}  // namespace
}  // namespace xltag::bench

#pragma once

#include <string>
#include <vector>

#include "xltag/corpus.hpp"
#include "xltag/embed.hpp"
#include "xltag/rng.hpp"

namespace xltag::bench {

inline EmbeddingSpace random_space(std::size_t vocab, std::size_t dim, Rng &rng) {
    std::vector<std::string> words;
    for (std::size_t i = 0; i < vocab; ++i) words.push_back("w" + std::to_string(i));
    Tensor table = Tensor::matrix(vocab + 1, dim);
    for (double &v : table.data()) v = rng.normal();
    return EmbeddingSpace{Vocabulary(words), EmbeddingMatrix(table), "bench", false};
}

inline TaggedCorpus random_corpus(std::size_t sentences, std::size_t length, std::size_t vocab, Rng &rng) {
    TaggedCorpus c;
    c.tagset = TagSet::universal();
    for (std::size_t s = 0; s < sentences; ++s) {
        Sentence sent;
        for (std::size_t t = 0; t < length; ++t) {
            sent.tokens.push_back("w" + std::to_string(rng.below(vocab)));
            sent.tags.push_back(static_cast<int>(rng.below(c.tagset.size())));
        }
        c.sentences.push_back(std::move(sent));
    }
    return c;
}

}  // namespace xltag::bench

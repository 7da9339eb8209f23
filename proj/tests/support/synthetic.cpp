#include "synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "xltag/error.hpp"

namespace xltag::testing {

namespace {

enum Tag : std::size_t { DET, NOUN, VERB, ADJ, ADV, PRON, ADP, PUNCT, kTags };

std::vector<double> cumulative(std::vector<double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double acc = 0.0;
    for (double &w : weights) {
        acc += w / total;
        w = acc;
    }
    weights.back() = 1.0;
    return weights;
}

std::size_t draw(const std::vector<double> &cum, Rng &rng) {
    const double u = rng.uniform();
    return static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
}

std::string make_word(Rng &rng) {
    static constexpr std::string_view consonants = "bdfgklmnprstvz";
    static constexpr std::string_view vowels = "aeiou";
    const std::size_t syllables = 2 + rng.below(2);
    std::string w;
    for (std::size_t i = 0; i < syllables; ++i) {
        w += consonants[rng.below(consonants.size())];
        w += vowels[rng.below(vowels.size())];
    }
    if (rng.below(2)) w += consonants[rng.below(consonants.size())];
    return w;
}

}  // namespace

TagSet synthetic_tagset() { return TagSet({"DET", "NOUN", "VERB", "ADJ", "ADV", "PRON", "ADP", "."}); }

SyntheticLanguage::SyntheticLanguage(LanguageOptions options, std::uint64_t seed)
    : options_(options), tagset_(synthetic_tagset()) {
    Rng rng(seed);
    const double s = options_.vocab_scale;
    const std::size_t sizes[kTags] = {5,
                                      static_cast<std::size_t>(60 * s),
                                      static_cast<std::size_t>(40 * s),
                                      static_cast<std::size_t>(25 * s),
                                      static_cast<std::size_t>(12 * s),
                                      8,
                                      8,
                                      2};

    std::set<std::string> used;
    std::vector<std::vector<std::size_t>> lists(kTags);
    std::vector<std::set<std::size_t>> word_tags;
    for (std::size_t tag = 0; tag < kTags; ++tag) {
        for (std::size_t i = 0; i < std::max<std::size_t>(sizes[tag], 1); ++i) {
            std::string w;
            do {
                w = make_word(rng);
            } while (used.count(w) || cipher(w) == w || used.count(cipher(w)));
            used.insert(w);
            lists[tag].push_back(words_.size());
            words_.push_back(std::move(w));
            word_tags.push_back({tag});
        }
    }
    // Ambiguous open-class words: also emitted by a partner tag.
    const std::pair<std::size_t, std::size_t> partners[] = {{NOUN, VERB}, {VERB, NOUN}, {ADJ, NOUN}, {ADV, ADJ}};
    for (auto [from, to] : partners) {
        const std::size_t n = static_cast<std::size_t>(std::round(options_.ambiguity * static_cast<double>(sizes[from])));
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t w = lists[from][rng.below(lists[from].size())];
            if (word_tags[w].count(to)) continue;
            word_tags[w].insert(to);
            auto &target = lists[to];
            target.insert(target.begin() + static_cast<std::ptrdiff_t>(rng.below(target.size() + 1)), w);
        }
    }
    for (std::size_t tag = 0; tag < kTags; ++tag) {
        Emission e;
        e.words = lists[tag];
        std::vector<double> weights;
        for (std::size_t r = 0; r < e.words.size(); ++r) weights.push_back(1.0 / static_cast<double>(r + 1));
        e.cumulative = cumulative(weights);
        emissions_.push_back(std::move(e));
    }

    //                     DET   NOUN  VERB  ADJ   ADV   PRON  ADP   .
    const double table[kTags][kTags] = {
        /* DET  */ {0.00, 0.70, 0.00, 0.30, 0.00, 0.00, 0.00, 0.00},
        /* NOUN */ {0.00, 0.00, 0.45, 0.00, 0.10, 0.00, 0.20, 0.25},
        /* VERB */ {0.40, 0.00, 0.00, 0.00, 0.15, 0.10, 0.15, 0.20},
        /* ADJ  */ {0.00, 0.90, 0.00, 0.10, 0.00, 0.00, 0.00, 0.00},
        /* ADV  */ {0.00, 0.00, 0.50, 0.20, 0.00, 0.00, 0.00, 0.30},
        /* PRON */ {0.00, 0.00, 0.90, 0.00, 0.10, 0.00, 0.00, 0.00},
        /* ADP  */ {0.60, 0.25, 0.00, 0.00, 0.00, 0.15, 0.00, 0.00},
        /* .    */ {0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 1.00},
    };
    for (const auto &row : table) transitions_.push_back(cumulative({row, row + kTags}));
    start_ = cumulative({0.35, 0.15, 0.00, 0.10, 0.08, 0.27, 0.05, 0.00});

    // Word vectors: mean of the word's tag prototypes plus isotropic noise.
    const std::size_t d = options_.dim;
    std::vector<std::vector<double>> protos(kTags, std::vector<double>(d));
    for (auto &p : protos)
        for (double &v : p) v = options_.separation * rng.normal();
    Tensor table_rows = Tensor::matrix(words_.size() + 1, d);
    for (std::size_t w = 0; w < words_.size(); ++w) {
        auto row = table_rows.row(w);
        for (std::size_t tag : word_tags[w])
            for (std::size_t c = 0; c < d; ++c) row[c] += protos[tag][c] / static_cast<double>(word_tags[w].size());
        for (double &v : row) v += options_.noise * rng.normal();
    }
    auto unk = table_rows.row(words_.size());
    for (std::size_t w = 0; w < words_.size(); ++w)
        for (std::size_t c = 0; c < d; ++c) unk[c] += table_rows.at(w, c) / static_cast<double>(words_.size());
    space_.vocab = Vocabulary(words_);
    space_.matrix = EmbeddingMatrix(std::move(table_rows));
    space_.space_id = "synthetic-source";
    space_.lowercase = false;
}

Sentence SyntheticLanguage::sample(Rng &rng) const {
    Sentence s;
    std::size_t tag = draw(start_, rng);
    while (true) {
        if (s.size() + 1 >= options_.max_length) tag = PUNCT;
        const Emission &e = emissions_[tag];
        s.tokens.push_back(words_[e.words[draw(e.cumulative, rng)]]);
        s.tags.push_back(static_cast<int>(tag));
        if (tag == PUNCT) break;
        tag = draw(transitions_[tag], rng);
    }
    return s;
}

TaggedCorpus SyntheticLanguage::corpus(std::size_t sentences, Rng &rng) const {
    TaggedCorpus c;
    c.provenance = Provenance::gold;
    c.tagset = tagset_;
    for (std::size_t i = 0; i < sentences; ++i) c.sentences.push_back(sample(rng));
    return c;
}

std::string cipher(std::string_view word) { return std::string(word.rbegin(), word.rend()); }

TaggedCorpus encipher(const TaggedCorpus &corpus) {
    TaggedCorpus out = corpus;
    for (auto &s : out.sentences)
        for (auto &t : s.tokens) t = cipher(t);
    return out;
}

EmbeddingSpace encipher(const EmbeddingSpace &space, const Tensor &rotation, std::string space_id) {
    std::vector<std::string> words;
    for (const auto &w : space.vocab.words()) words.push_back(cipher(w));
    const std::size_t d = space.dim();
    Tensor rows = Tensor::matrix(space.matrix.rows(), d);
    for (std::size_t r = 0; r < rows.rows(); ++r) {
        auto src = space.matrix.row(r);
        auto dst = rows.row(r);
        if (rotation.empty()) {
            std::copy(src.begin(), src.end(), dst.begin());
            continue;
        }
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) dst[j] += src[i] * rotation.at(i, j);
    }
    EmbeddingSpace out;
    out.vocab = Vocabulary(words);
    out.matrix = EmbeddingMatrix(std::move(rows));
    out.space_id = std::move(space_id);
    out.lowercase = space.lowercase;
    return out;
}

BilingualLexicon cipher_lexicon(const Vocabulary &source) {
    BilingualLexicon lex;
    for (const auto &w : source.words()) lex.pairs.emplace_back(w, cipher(w));
    return lex;
}

Tensor random_orthogonal(std::size_t d, Rng &rng) {
    Tensor q = Tensor::matrix(d, d);
    for (double &v : q.data()) v = rng.normal();
    // Orthonormalize columns.
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t k = 0; k < j; ++k) {
            double dot = 0.0;
            for (std::size_t i = 0; i < d; ++i) dot += q.at(i, j) * q.at(i, k);
            for (std::size_t i = 0; i < d; ++i) q.at(i, j) -= dot * q.at(i, k);
        }
        double norm = 0.0;
        for (std::size_t i = 0; i < d; ++i) norm += q.at(i, j) * q.at(i, j);
        norm = std::sqrt(norm);
        for (std::size_t i = 0; i < d; ++i) q.at(i, j) /= norm;
    }
    return q;
}

Tensor random_invertible(std::size_t d, Rng &rng) {
    // Q * diag(s) with singular values in [0.5, 2].
    Tensor q = random_orthogonal(d, rng);
    for (std::size_t j = 0; j < d; ++j) {
        const double s = rng.uniform(0.5, 2.0);
        for (std::size_t i = 0; i < d; ++i) q.at(i, j) *= s;
    }
    Tensor r = random_orthogonal(d, rng);
    Tensor out = Tensor::matrix(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t k = 0; k < d; ++k)
            for (std::size_t j = 0; j < d; ++j) out.at(i, j) += q.at(i, k) * r.at(k, j);
    return out;
}

TaggedCorpus corrupt_types(const TaggedCorpus &corpus, std::size_t every) {
    const std::size_t k = corpus.tagset.size();
    std::map<std::string, std::vector<std::size_t>> counts;
    for (const auto &s : corpus.sentences)
        for (std::size_t i = 0; i < s.size(); ++i) {
            auto &c = counts[s.tokens[i]];
            c.resize(k, 0);
            if (s.labelled() && s.tags[i] != kNoTag) ++c[static_cast<std::size_t>(s.tags[i])];
        }
    std::vector<std::pair<std::string, std::size_t>> ranked;
    for (const auto &[w, c] : counts) {
        std::size_t total = 0;
        for (auto v : c) total += v;
        ranked.emplace_back(w, total);
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto &a, const auto &b) { return a.second > b.second; });
    std::map<std::string, int> wrong;
    for (std::size_t r = 0; r < ranked.size(); r += every) {
        const auto &c = counts[ranked[r].first];
        const auto majority = static_cast<std::size_t>(std::max_element(c.begin(), c.end()) - c.begin());
        wrong[ranked[r].first] = static_cast<int>((majority + 1) % k);
    }
    TaggedCorpus out = corpus;
    for (auto &s : out.sentences)
        for (std::size_t i = 0; i < s.size(); ++i) {
            auto it = wrong.find(s.tokens[i]);
            if (it != wrong.end() && s.labelled() && s.tags[i] != kNoTag) s.tags[i] = it->second;
        }
    return out;
}

TaggedCorpus swap_labels(const TaggedCorpus &corpus, int a, int b) {
    TaggedCorpus out = corpus;
    for (auto &s : out.sentences)
        for (int &t : s.tags) {
            if (t == a) {
                t = b;
            } else if (t == b) {
                t = a;
            }
        }
    return out;
}

double tag_agreement(const TaggedCorpus &gold, const TaggedCorpus &predicted) {
    std::size_t same = 0;
    std::size_t total = 0;
    for (std::size_t s = 0; s < gold.sentences.size(); ++s)
        for (std::size_t i = 0; i < gold.sentences[s].size(); ++i) {
            ++total;
            same += gold.sentences[s].tags[i] == predicted.sentences.at(s).tags.at(i);
        }
    return total ? 100.0 * static_cast<double>(same) / static_cast<double>(total) : 0.0;
}

}  // namespace xltag::testing

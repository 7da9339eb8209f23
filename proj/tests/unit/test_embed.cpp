#include <cmath>
#include <limits>
#include <sstream>
#include <gtest/gtest.h>

#include "xltag/embed.hpp"
#include "xltag/error.hpp"
#include "xltag/rng.hpp"

namespace xltag {
namespace {

LoadedEmbeddings load(const std::string &text) {
    std::istringstream in(text);
    return load_embeddings(in);
}

std::vector<double> row_of(const LoadedEmbeddings &e, std::size_t i) {
    auto r = e.matrix.row(i);
    return {r.begin(), r.end()};
}

TEST(Vocabulary, IndicesAndUnknown) {
    const std::vector<std::string> words = {"a", "b", "a", "c"};
    const Vocabulary v(words);
    EXPECT_EQ(v.size(), 4u);
    EXPECT_EQ(v.unk_index(), 3u);
    EXPECT_EQ(v.index("a"), 0u);
    EXPECT_EQ(v.index("c"), 2u);
    EXPECT_EQ(v.index("zzz"), v.unk_index());
    EXPECT_EQ(v.word(v.unk_index()), Vocabulary::kUnknown);
    EXPECT_THROW(v.word(4), InputError);
}

TEST(Vocabulary, CaseFolding) {
    const std::vector<std::string> words = {"a", "Bank"};
    const Vocabulary v(words);
    EXPECT_EQ(v.index("A"), v.unk_index());
    EXPECT_EQ(v.index("A", true), 0u);
    EXPECT_EQ(v.index("Bank", true), 1u);
    EXPECT_EQ(fold_case("ÄBc"), "Äbc");
}

TEST(LoadEmbeddings, HeaderAndMeanUnknownRow) {
    const auto e = load("2 2\na 1 0\nb 0 1\n");
    EXPECT_EQ(e.vocab.size(), 3u);
    EXPECT_EQ(e.matrix.rows(), 3u);
    EXPECT_EQ(e.matrix.dim(), 2u);
    EXPECT_EQ(row_of(e, 0), (std::vector<double>{1.0, 0.0}));
    EXPECT_EQ(row_of(e, e.vocab.unk_index()), (std::vector<double>{0.5, 0.5}));
    EXPECT_TRUE(e.warnings.empty());
}

TEST(LoadEmbeddings, WithoutHeader) {
    const auto e = load("a 1 2 3\nb 4 5 6");
    EXPECT_EQ(e.vocab.size(), 3u);
    EXPECT_EQ(e.matrix.dim(), 3u);
    EXPECT_EQ(row_of(e, 2), (std::vector<double>{2.5, 3.5, 4.5}));
}

TEST(LoadEmbeddings, EmptyStream) {
    try {
        load("");
        FAIL();
    } catch (const InputError &e) {
        EXPECT_STREQ(e.what(), "no embeddings");
    }
}

TEST(LoadEmbeddings, DimensionMismatchNamesLine) {
    try {
        load("2 2\na 1 0\nb 0 1\nc 1 2 3\n");
        FAIL();
    } catch (const InputError &e) {
        EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
    }
}

TEST(LoadEmbeddings, RejectsBadNumbersAndNonFinite) {
    EXPECT_THROW(load("a 1 x\n"), InputError);
    EXPECT_THROW(load("a 1 inf\n"), InputError);
    EXPECT_THROW(load("a 1 nan\n"), InputError);
    EXPECT_THROW(load("a\n"), InputError);
}

TEST(LoadEmbeddings, DuplicateKeepsFirstAndWarns) {
    const auto e = load("a 1 0\nb 0 1\na 5 5\n");
    EXPECT_EQ(e.vocab.size(), 3u);
    EXPECT_EQ(row_of(e, 0), (std::vector<double>{1.0, 0.0}));
    ASSERT_EQ(e.warnings.size(), 1u);
    EXPECT_NE(e.warnings[0].find("a"), std::string::npos);
}

TEST(LoadEmbeddings, RoundTripIsBitIdentical) {
    Rng rng(5);
    std::ostringstream text;
    text << "40 7\n";
    for (int w = 0; w < 40; ++w) {
        text << "w" << w;
        for (int j = 0; j < 7; ++j) text << ' ' << format_double(rng.normal() * std::pow(10.0, rng.uniform(-8, 8)));
        text << '\n';
    }
    const auto first = load(text.str());
    std::ostringstream out;
    write_embeddings(out, first.vocab, first.matrix);
    const auto second = load(out.str());
    ASSERT_EQ(first.vocab.size(), second.vocab.size());
    EXPECT_EQ(first.matrix.table(), second.matrix.table());
    std::ostringstream again;
    write_embeddings(again, second.vocab, second.matrix);
    EXPECT_EQ(out.str(), again.str());
}

TEST(FormatDouble, ParsesBackExactly) {
    Rng rng(9);
    for (int i = 0; i < 2000; ++i) {
        const double v = rng.normal() * std::pow(10.0, rng.uniform(-300, 300));
        EXPECT_EQ(std::stod(format_double(v)), v);
    }
    EXPECT_EQ(format_double(0.5), "0.5");
}

TEST(Lookup, KnownUnknownAndFolded) {
    auto e = load("a 1 0\nb 0 1\n");
    EmbeddingSpace space{e.vocab, e.matrix, "s", false};
    auto vec = [&](std::string_view w) {
        auto r = space.lookup(w);
        return std::vector<double>(r.begin(), r.end());
    };
    EXPECT_EQ(vec("a"), (std::vector<double>{1.0, 0.0}));
    EXPECT_EQ(vec("zzz"), (std::vector<double>{0.5, 0.5}));
    EXPECT_EQ(vec("A"), (std::vector<double>{0.5, 0.5}));
    space.lowercase = true;
    EXPECT_EQ(vec("A"), (std::vector<double>{1.0, 0.0}));
}

TEST(Lexicon, CommentsBlanksAndDuplicates) {
    std::istringstream in("# header\nhouse\thaus\n\nhouse\thaus\ndog\thund\n");
    const auto lex = load_lexicon(in);
    ASSERT_EQ(lex.pairs.size(), 2u);
    EXPECT_EQ(lex.pairs[0], (std::pair<std::string, std::string>{"house", "haus"}));
    EXPECT_EQ(lex.pairs[1].second, "hund");
}

TEST(Lexicon, MalformedLineRejected) {
    std::istringstream in("house haus\n");
    EXPECT_THROW(load_lexicon(in), InputError);
}

TEST(Lexicon, IdentityCoversKnownWords) {
    const std::vector<std::string> words = {"x", "y"};
    const auto lex = identity_lexicon(Vocabulary(words));
    ASSERT_EQ(lex.pairs.size(), 2u);
    EXPECT_EQ(lex.pairs[1], (std::pair<std::string, std::string>{"y", "y"}));
}

TEST(EmbeddingMatrix, RejectsNonFinite) {
    Tensor t = Tensor::matrix(2, 2);
    t[1] = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(EmbeddingMatrix{t}, InputError);
}

}  // namespace
}  // namespace xltag

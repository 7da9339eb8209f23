#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "xltag/tensor.hpp"

namespace xltag {

/// ASCII case folding; bytes outside A-Z (including UTF-8 continuation bytes)
/// are left alone.
std::string fold_case(std::string_view word);

/// Word <-> index map. Indices 0..size()-2 follow insertion order and the last
/// index is the reserved unknown-word slot.
class Vocabulary {
public:
    static constexpr std::string_view kUnknown = "<unk>";

    Vocabulary() = default;
    /// Duplicates keep their first position.
    explicit Vocabulary(std::span<const std::string> words);

    std::size_t size() const { return words_.size() + 1; }
    std::size_t unk_index() const { return words_.size(); }

    std::optional<std::size_t> find(std::string_view word) const;
    /// Exact match first; with `lowercase`, a case-folded retry; else unk.
    std::size_t index(std::string_view word, bool lowercase = false) const;
    std::string_view word(std::size_t index) const;
    bool contains(std::string_view word) const { return find(word).has_value(); }

    /// Known words in index order, without the unk slot.
    std::span<const std::string> words() const { return words_; }

private:
    std::vector<std::string> words_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// |V| x d matrix of fixed word vectors.
class EmbeddingMatrix {
public:
    EmbeddingMatrix() = default;
    explicit EmbeddingMatrix(Tensor rows);

    std::size_t rows() const { return table_.rows(); }
    std::size_t dim() const { return table_.cols(); }
    std::span<const double> row(std::size_t i) const { return table_.row(i); }
    const Tensor &table() const { return table_; }

private:
    Tensor table_ = Tensor::matrix(0, 0);
};

/// Vocabulary, vectors and the identity of the vector space they live in.
/// Taggers record the space id they were trained in; distant tagging refuses
/// target embeddings from any other space.
struct EmbeddingSpace {
    Vocabulary vocab;
    EmbeddingMatrix matrix;
    std::string space_id;
    bool lowercase = true;

    std::size_t dim() const { return matrix.dim(); }
    std::size_t index(std::string_view word) const { return vocab.index(word, lowercase); }
    /// Row of `word`, or of the unk slot when absent.
    std::span<const double> lookup(std::string_view word) const { return matrix.row(index(word)); }
};

struct LoadedEmbeddings {
    Vocabulary vocab;
    EmbeddingMatrix matrix;
    std::vector<std::string> warnings;
};

/// Reads word2vec text layout: an optional "count dim" header, then
/// "word v1 ... vd" per line. The unk row is appended as the mean of all rows.
LoadedEmbeddings load_embeddings(std::istream &in);
LoadedEmbeddings load_embeddings_file(const std::string &path);

/// Writes the known words (not the unk slot) with a "count dim" header.
/// Values use 17 significant digits, so a reload is bit-identical.
void write_embeddings(std::ostream &out, const Vocabulary &vocab, const EmbeddingMatrix &matrix);

/// Shortest-exact decimal rendering shared by every text format we write.
std::string format_double(double value);

struct BilingualLexicon {
    std::vector<std::pair<std::string, std::string>> pairs;
};

/// "source<TAB>target" per line; '#' lines and blank lines are skipped;
/// duplicate pairs are dropped.
BilingualLexicon load_lexicon(std::istream &in);
BilingualLexicon load_lexicon_file(const std::string &path);

/// Every pair with a cipher-style identity: (w, w).
BilingualLexicon identity_lexicon(const Vocabulary &vocab);

}  // namespace xltag

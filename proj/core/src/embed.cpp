#include "xltag/embed.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "xltag/error.hpp"
#include "text_util.hpp"

namespace xltag {

std::string fold_case(std::string_view word) {
    std::string out(word);
    for (char &c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

Vocabulary::Vocabulary(std::span<const std::string> words) {
    for (const auto &w : words) {
        if (index_.emplace(w, words_.size()).second) words_.push_back(w);
    }
}

std::optional<std::size_t> Vocabulary::find(std::string_view word) const {
    auto it = index_.find(std::string(word));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::size_t Vocabulary::index(std::string_view word, bool lowercase) const {
    if (auto hit = find(word)) return *hit;
    if (lowercase) {
        if (auto hit = find(fold_case(word))) return *hit;
    }
    return unk_index();
}

std::string_view Vocabulary::word(std::size_t index) const {
    if (index == unk_index()) return kUnknown;
    if (index > unk_index()) throw InputError("vocabulary: index " + std::to_string(index) + " out of range");
    return words_[index];
}

EmbeddingMatrix::EmbeddingMatrix(Tensor rows) : table_(std::move(rows)) {
    if (table_.rank() != 2) throw ShapeError("embeddings: expected a matrix, got " + table_.shape_string());
    if (!table_.all_finite()) throw InputError("embeddings: non-finite value");
}

std::string format_double(double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

LoadedEmbeddings load_embeddings(std::istream &in) {
    LoadedEmbeddings out;
    std::vector<std::string> words;
    std::vector<double> values;
    std::set<std::string> seen;
    std::size_t dim = 0;
    std::size_t declared = 0;
    bool have_header = false;
    std::string line;
    std::size_t line_no = 0;

    while (std::getline(in, line)) {
        ++line_no;
        auto fields = detail::split_ws(line);
        if (fields.empty()) continue;

        if (line_no == 1 && fields.size() == 2) {
            std::size_t count = 0;
            std::size_t d = 0;
            if (detail::parse_size(fields[0], count) && detail::parse_size(fields[1], d)) {
                have_header = true;
                declared = count;
                dim = d;
                continue;
            }
        }
        const std::size_t got = fields.size() - 1;
        if (got == 0) {
            throw InputError("embeddings: line " + std::to_string(line_no) + ": word without a vector");
        }
        if (dim == 0) dim = got;
        if (got != dim) {
            throw InputError("embeddings: line " + std::to_string(line_no) + ": expected " +
                             std::to_string(dim) + " values, got " + std::to_string(got));
        }
        std::string word(fields[0]);
        if (!seen.insert(word).second) {
            out.warnings.push_back("embeddings: line " + std::to_string(line_no) + ": duplicate word '" +
                                   word + "' ignored");
            continue;
        }
        for (std::size_t i = 1; i < fields.size(); ++i) {
            double v = 0.0;
            if (!detail::parse_double(fields[i], v) || !std::isfinite(v)) {
                throw InputError("embeddings: line " + std::to_string(line_no) + ": bad number '" +
                                 std::string(fields[i]) + "'");
            }
            values.push_back(v);
        }
        words.push_back(std::move(word));
    }
    if (words.empty()) throw InputError("no embeddings");
    if (have_header && declared != words.size()) {
        out.warnings.push_back("embeddings: header declares " + std::to_string(declared) + " words, read " +
                               std::to_string(words.size()));
    }

    Tensor table = Tensor::matrix(words.size() + 1, dim);
    std::copy(values.begin(), values.end(), table.data().begin());
    auto unk = table.row(words.size());
    for (std::size_t r = 0; r < words.size(); ++r) {
        auto row = table.row(r);
        for (std::size_t c = 0; c < dim; ++c) unk[c] += row[c];
    }
    for (double &v : unk) v /= static_cast<double>(words.size());

    out.vocab = Vocabulary(words);
    out.matrix = EmbeddingMatrix(std::move(table));
    return out;
}

LoadedEmbeddings load_embeddings_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open embeddings file: " + path);
    return load_embeddings(in);
}

void write_embeddings(std::ostream &out, const Vocabulary &vocab, const EmbeddingMatrix &matrix) {
    const auto words = vocab.words();
    out << words.size() << ' ' << matrix.dim() << '\n';
    for (std::size_t r = 0; r < words.size(); ++r) {
        out << words[r];
        for (double v : matrix.row(r)) out << ' ' << format_double(v);
        out << '\n';
    }
}

BilingualLexicon load_lexicon(std::istream &in) {
    BilingualLexicon lex;
    std::set<std::pair<std::string, std::string>> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
            throw InputError("lexicon: line " + std::to_string(line_no) + ": expected source<TAB>target");
        }
        std::pair<std::string, std::string> p{line.substr(0, tab), line.substr(tab + 1)};
        if (seen.insert(p).second) lex.pairs.push_back(std::move(p));
    }
    return lex;
}

BilingualLexicon load_lexicon_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open lexicon file: " + path);
    return load_lexicon(in);
}

BilingualLexicon identity_lexicon(const Vocabulary &vocab) {
    BilingualLexicon lex;
    for (const auto &w : vocab.words()) lex.pairs.emplace_back(w, w);
    return lex;
}

}  // namespace xltag

#include "xltag/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "xltag/error.hpp"
#include "text_util.hpp"

namespace xltag {

TagSet::TagSet(std::vector<std::string> tags) : tags_(std::move(tags)) {
    for (std::size_t i = 0; i < tags_.size(); ++i) {
        if (!index_.emplace(tags_[i], i).second) throw InputError("tagset: duplicate tag '" + tags_[i] + "'");
    }
}

TagSet TagSet::universal() {
    return TagSet({"NOUN", "VERB", "ADJ", "ADV", "PRON", "DET", "ADP", "NUM", "CONJ", "PRT", ".", "X"});
}

std::optional<std::size_t> TagSet::find(std::string_view tag) const {
    auto it = index_.find(std::string(tag));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::size_t TagSet::index(std::string_view tag) const {
    if (auto i = find(tag)) return *i;
    throw InputError("tagset: unknown tag '" + std::string(tag) + "'");
}

std::string_view provenance_name(Provenance p) {
    switch (p) {
        case Provenance::gold: return "gold";
        case Provenance::distant: return "distant";
        case Provenance::unlabeled: return "unlabeled";
    }
    return "unknown";
}

std::size_t TaggedCorpus::token_count() const {
    std::size_t n = 0;
    for (const auto &s : sentences) n += s.size();
    return n;
}

std::size_t TaggedCorpus::labelled_count() const {
    std::size_t n = 0;
    for (const auto &s : sentences)
        for (int t : s.tags) n += t != kNoTag;
    return n;
}

void TaggedCorpus::validate() const {
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        const auto &s = sentences[i];
        if (provenance == Provenance::unlabeled && s.labelled()) {
            throw InputError("corpus: unlabeled corpus carries tags in sentence " + std::to_string(i));
        }
        if (s.labelled() && s.tags.size() != s.tokens.size()) {
            throw InputError("corpus: sentence " + std::to_string(i) + " has " + std::to_string(s.tokens.size()) +
                             " tokens but " + std::to_string(s.tags.size()) + " tags");
        }
        for (int t : s.tags) {
            if (t != kNoTag && (t < 0 || static_cast<std::size_t>(t) >= tagset.size())) {
                throw InputError("corpus: tag index " + std::to_string(t) + " outside tagset of size " +
                                 std::to_string(tagset.size()));
            }
        }
    }
}

TaggedCorpus read_conll(std::istream &in, ConllColumns columns) {
    std::vector<std::string> tag_names;
    std::unordered_map<std::string, int> tag_index;
    TaggedCorpus corpus;
    corpus.provenance = Provenance::gold;
    Sentence current;
    const std::size_t needed = std::max(columns.form, columns.postag) + 1;

    auto flush = [&] {
        if (!current.tokens.empty()) corpus.sentences.push_back(std::move(current));
        current = Sentence{};
    };

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::trim(line).empty()) {
            flush();
            continue;
        }
        if (line[0] == '#') continue;
        auto fields = detail::split_char(line, '\t');
        if (fields.size() < needed) {
            throw InputError("conll: line " + std::to_string(line_no) + ": " + std::to_string(fields.size()) +
                             " columns, need at least " + std::to_string(needed));
        }
        const std::string tag(fields[columns.postag]);
        auto [it, inserted] = tag_index.emplace(tag, static_cast<int>(tag_names.size()));
        if (inserted) tag_names.push_back(tag);
        current.tokens.emplace_back(fields[columns.form]);
        current.tags.push_back(it->second);
    }
    flush();
    corpus.tagset = TagSet(std::move(tag_names));
    return corpus;
}

TaggedCorpus read_conll_file(const std::string &path, ConllColumns columns) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open corpus file: " + path);
    return read_conll(in, columns);
}

void write_conll(std::ostream &out, const TaggedCorpus &corpus, ConllColumns columns) {
    const std::size_t width = std::max(columns.form, columns.postag) + 1;
    std::vector<std::string> row(width);
    for (const auto &s : corpus.sentences) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            std::fill(row.begin(), row.end(), "_");
            if (columns.form != 0 && columns.postag != 0) row[0] = std::to_string(i + 1);
            row[columns.form] = s.tokens[i];
            if (s.labelled() && s.tags[i] != kNoTag) row[columns.postag] = corpus.tagset.tag(s.tags[i]);
            for (std::size_t c = 0; c < width; ++c) {
                if (c) out << '\t';
                out << row[c];
            }
            out << '\n';
        }
        out << '\n';
    }
}

TaggedCorpus read_plain(std::istream &in) {
    TaggedCorpus corpus;
    corpus.provenance = Provenance::unlabeled;
    std::string line;
    while (std::getline(in, line)) {
        auto fields = detail::split_ws(line);
        if (fields.empty()) continue;
        Sentence s;
        for (auto f : fields) s.tokens.emplace_back(f);
        corpus.sentences.push_back(std::move(s));
    }
    return corpus;
}

TagMapping TagMapping::identity(const TagSet &tags) {
    TagMapping m;
    for (const auto &t : tags.tags()) m.entries.emplace(t, t);
    return m;
}

TagMapping load_tag_mapping(std::istream &in) {
    TagMapping m;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::trim(line).empty() || line[0] == '#') continue;
        auto fields = detail::split_char(line, '\t');
        if (fields.size() != 2 || fields[0].empty() || fields[1].empty()) {
            throw InputError("tag mapping: line " + std::to_string(line_no) + ": expected fine<TAB>universal");
        }
        auto [it, inserted] = m.entries.emplace(std::string(fields[0]), std::string(fields[1]));
        if (!inserted && it->second != fields[1]) {
            throw InputError("tag mapping: line " + std::to_string(line_no) + ": conflicting entry for '" +
                             it->first + "'");
        }
    }
    return m;
}

TagMapping load_tag_mapping_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open tag mapping file: " + path);
    return load_tag_mapping(in);
}

TaggedCorpus map_tags(const TaggedCorpus &corpus, const TagMapping &mapping, const TagSet &universal) {
    std::vector<int> remap(corpus.tagset.size(), kNoTag);
    std::set<std::string> unmapped;
    std::set<std::string> unknown;
    std::vector<bool> used(corpus.tagset.size(), false);
    for (const auto &s : corpus.sentences)
        for (int t : s.tags)
            if (t != kNoTag) used.at(static_cast<std::size_t>(t)) = true;

    for (std::size_t i = 0; i < corpus.tagset.size(); ++i) {
        if (!used[i]) continue;
        const auto &fine = corpus.tagset.tag(i);
        auto it = mapping.entries.find(fine);
        if (it == mapping.entries.end()) {
            unmapped.insert(fine);
            continue;
        }
        auto target = universal.find(it->second);
        if (!target) {
            unknown.insert(it->second);
            continue;
        }
        remap[i] = static_cast<int>(*target);
    }
    auto join = [](const std::set<std::string> &items) {
        std::string out;
        for (const auto &s : items) out += (out.empty() ? "" : ", ") + s;
        return out;
    };
    if (!unmapped.empty()) throw InputError("map_tags: unmapped tags: " + join(unmapped));
    if (!unknown.empty()) throw InputError("map_tags: mapping targets not in tagset: " + join(unknown));

    TaggedCorpus out;
    out.provenance = corpus.provenance;
    out.tagset = universal;
    out.sentences = corpus.sentences;
    for (auto &s : out.sentences)
        for (int &t : s.tags)
            if (t != kNoTag) t = remap[static_cast<std::size_t>(t)];
    return out;
}

TaggedCorpus retag(const TaggedCorpus &corpus, const TagSet &target) {
    return map_tags(corpus, TagMapping::identity(corpus.tagset), target);
}

TaggedCorpus strip_tags(const TaggedCorpus &corpus) {
    TaggedCorpus out;
    out.provenance = Provenance::unlabeled;
    out.tagset = corpus.tagset;
    out.sentences.reserve(corpus.sentences.size());
    for (const auto &s : corpus.sentences) out.sentences.push_back(Sentence{s.tokens, {}});
    return out;
}

CorpusSplit split_corpus(const TaggedCorpus &corpus) {
    const std::size_t n = corpus.sentences.size();
    if (n < kGoldSentences + kDevSentences + 1) {
        throw InputError("split_corpus: need at least " + std::to_string(kGoldSentences + kDevSentences + 1) +
                         " sentences, got " + std::to_string(n));
    }
    auto slice = [&](std::size_t begin, std::size_t end) {
        TaggedCorpus part;
        part.provenance = corpus.provenance;
        part.tagset = corpus.tagset;
        part.sentences.assign(corpus.sentences.begin() + static_cast<std::ptrdiff_t>(begin),
                              corpus.sentences.begin() + static_cast<std::ptrdiff_t>(end));
        return part;
    };
    CorpusSplit split;
    split.gold_train = slice(0, kGoldSentences);
    split.dev = slice(n - kDevSentences, n);
    split.remainder = strip_tags(slice(kGoldSentences, n - kDevSentences));
    return split;
}

}  // namespace xltag

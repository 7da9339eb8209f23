#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace xltag {

/// Ordered, duplicate-free tag inventory.
class TagSet {
public:
    TagSet() = default;
    explicit TagSet(std::vector<std::string> tags);

    /// The coarse 12-tag universal inventory.
    static TagSet universal();

    std::size_t size() const { return tags_.size(); }
    std::optional<std::size_t> find(std::string_view tag) const;
    /// Index of `tag`, throwing InputError when absent.
    std::size_t index(std::string_view tag) const;
    const std::string &tag(std::size_t i) const { return tags_.at(i); }
    std::span<const std::string> tags() const { return tags_; }

    bool operator==(const TagSet &other) const { return tags_ == other.tags_; }

private:
    std::vector<std::string> tags_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Marks a token whose label has not been revealed (partial annotation).
inline constexpr int kNoTag = -1;

enum class Provenance { gold, distant, unlabeled };

std::string_view provenance_name(Provenance p);

struct Sentence {
    std::vector<std::string> tokens;
    /// One entry per token, or empty for unlabeled text. kNoTag entries are
    /// allowed in partially annotated gold data.
    std::vector<int> tags;

    std::size_t size() const { return tokens.size(); }
    bool labelled() const { return !tags.empty(); }
};

struct TaggedCorpus {
    std::vector<Sentence> sentences;
    Provenance provenance = Provenance::gold;
    TagSet tagset;

    std::size_t token_count() const;
    /// Tokens carrying a tag index (excludes kNoTag and unlabeled sentences).
    std::size_t labelled_count() const;
    bool empty() const { return sentences.empty(); }
    /// Throws InputError if a tag index is outside the tagset, a tag vector is
    /// ragged, or an unlabeled corpus carries tags.
    void validate() const;
};

/// Zero-based column positions of FORM and POSTAG.
struct ConllColumns {
    std::size_t form = 1;
    std::size_t postag = 4;
};

/// Blank-line separated sentences, one tab-separated token per line. Lines
/// starting with '#' are comments. The tagset lists fine-grained tags in
/// order of first appearance.
TaggedCorpus read_conll(std::istream &in, ConllColumns columns = {});
TaggedCorpus read_conll_file(const std::string &path, ConllColumns columns = {});

/// Writes enough columns to cover FORM and POSTAG; column 0 is a 1-based
/// token id unless it holds FORM or POSTAG; other columns are "_".
void write_conll(std::ostream &out, const TaggedCorpus &corpus, ConllColumns columns = {});

/// One whitespace-tokenized sentence per line, unlabeled.
TaggedCorpus read_plain(std::istream &in);

/// Fine-grained tag -> universal tag.
struct TagMapping {
    std::map<std::string, std::string> entries;

    static TagMapping identity(const TagSet &tags);
};

/// Two-column TSV "fine<TAB>universal"; '#' lines are comments.
TagMapping load_tag_mapping(std::istream &in);
TagMapping load_tag_mapping_file(const std::string &path);

/// Re-indexes every tag into `universal`. Unmapped tags are an error that
/// lists all of them.
TaggedCorpus map_tags(const TaggedCorpus &corpus, const TagMapping &mapping, const TagSet &universal);

/// Re-indexes a corpus whose tags are already spelled as in `target`.
TaggedCorpus retag(const TaggedCorpus &corpus, const TagSet &target);

/// Same sentences with tags dropped, provenance unlabeled.
TaggedCorpus strip_tags(const TaggedCorpus &corpus);

inline constexpr std::size_t kGoldSentences = 20;
inline constexpr std::size_t kDevSentences = 20;

struct CorpusSplit {
    TaggedCorpus gold_train;  // first 20 sentences
    TaggedCorpus dev;         // last 20 sentences
    TaggedCorpus remainder;   // everything between, untagged
};

/// Requires at least 41 sentences so that no part overlaps or is empty.
CorpusSplit split_corpus(const TaggedCorpus &corpus);

}  // namespace xltag

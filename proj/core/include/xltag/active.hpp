#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xltag/corpus.hpp"
#include "xltag/embed.hpp"
#include "xltag/rng.hpp"
#include "xltag/tagger.hpp"
#include "xltag/trainer.hpp"

namespace xltag {

enum class Strategy { token, sentence, freq_type, sum_type, random };
enum class Base { trad, joint };

std::string_view strategy_name(Strategy s);
Strategy parse_strategy(std::string_view name);
std::string_view base_name(Base b);
Base parse_base(std::string_view name);

struct Position {
    std::size_t sentence = 0;
    std::size_t index = 0;

    friend auto operator<=>(const Position &, const Position &) = default;
};

/// Unlabeled pool whose gold tags are hidden behind an oracle. Labels are
/// revealed only through annotate().
class AnnotationPool {
public:
    explicit AnnotationPool(TaggedCorpus oracle);

    const TaggedCorpus &oracle() const { return oracle_; }
    std::size_t capacity() const { return capacity_; }
    /// Number of token positions whose labels have been revealed.
    std::size_t budget_spent() const { return budget_spent_; }
    bool exhausted() const { return budget_spent_ == capacity_; }

    bool is_annotated(Position p) const { return revealed_.at(p.sentence).at(p.index) != kNoTag; }
    /// Revealed label, or kNoTag.
    int revealed(Position p) const { return revealed_.at(p.sentence).at(p.index); }

    /// Word types in lexicographic order.
    std::span<const std::string> types() const { return types_; }
    /// Every occurrence of `type` in (sentence, position) order.
    const std::vector<Position> &occurrences(std::string_view type) const;
    /// Most frequent oracle tag of `type`; ties go to the lowest tag index.
    int majority_label(std::string_view type) const;
    /// True while the type has an unannotated occurrence.
    bool type_open(std::string_view type) const;
    /// Types whose occurrences are all annotated.
    std::vector<std::string> annotated_types() const;
    std::size_t unannotated_in_sentence(std::size_t s) const;

    /// Revealed labels as a gold corpus. Sentences without any revealed label
    /// are omitted; hidden positions carry kNoTag.
    TaggedCorpus revealed_corpus() const;

    /// Marks a position labelled. Returns false if it already was.
    bool reveal(Position p, int label);

private:
    struct TypeInfo {
        std::vector<Position> occurrences;
        int majority = 0;
        std::size_t open = 0;
    };
    const TypeInfo &info(std::string_view type) const;

    TaggedCorpus oracle_;
    std::vector<std::vector<int>> revealed_;
    std::vector<std::string> types_;
    std::map<std::string, TypeInfo, std::less<>> type_info_;
    std::size_t capacity_ = 0;
    std::size_t budget_spent_ = 0;
};

enum class SelectionKind { token, sentence, type };

struct Selection {
    SelectionKind kind = SelectionKind::token;
    Position position;     // token
    std::size_t sentence = 0;  // sentence
    std::string type;      // type
    double score = 0.0;
};

/// Shannon entropy in nats; zero-probability terms contribute nothing.
double entropy(std::span<const double> probs);

/// Entropy of the model's evaluation head at position t.
double token_entropy(const Tagger &model, const EmbeddingSpace &space, const Sentence &sentence, std::size_t t);

/// Per-token entropies of the whole pool under one model.
using EntropyTable = std::vector<std::vector<double>>;
EntropyTable pool_entropies(const Tagger &model, const EmbeddingSpace &space, const AnnotationPool &pool);

/// Picks the next item to annotate. Ties go to the lexicographically smaller
/// token, type or sentence text, then to the lowest (sentence, position).
Selection select(Strategy strategy, const AnnotationPool &pool, const EntropyTable &entropies, Rng &rng);
Selection select(Strategy strategy, const AnnotationPool &pool, const Tagger &model, const EmbeddingSpace &space,
                 Rng &rng);

struct Annotation {
    std::vector<std::pair<Position, int>> labels;
};

/// Reveals labels for a selection: gold tags for tokens and sentences, the
/// type's majority tag at every occurrence for types. At most `limit` new
/// positions are labelled, in (sentence, position) order.
Annotation annotate(AnnotationPool &pool, const Selection &selection,
                    std::size_t limit = std::numeric_limits<std::size_t>::max());

struct SimulationConfig {
    TaggerShape shape;
    TrainConfig train;
    std::vector<std::size_t> budgets;
    std::uint64_t seed = 1;
};

struct SimulationData {
    const EmbeddingSpace *space = nullptr;
    const TaggedCorpus *distant = nullptr;  // required for the joint base
    const TaggedCorpus *dev = nullptr;
    const TaggedCorpus *test = nullptr;
};

struct CurvePoint {
    std::size_t budget = 0;
    double accuracy = 0.0;  // percent
};

struct Curve {
    Strategy strategy = Strategy::random;
    Base base = Base::joint;
    std::uint64_t seed = 0;
    std::vector<CurvePoint> points;
    std::size_t budget_spent = 0;
    std::vector<std::string> warnings;
};

/// Select, annotate and retrain from a seeded initialization at every budget
/// checkpoint. Between checkpoints selection uses the model of the previous
/// checkpoint.
Curve simulate(Strategy strategy, AnnotationPool pool, Base base, const SimulationData &data,
               const SimulationConfig &cfg);

/// "strategy base seed budget accuracy", tab-separated, one line per point.
void write_curve(std::ostream &out, const Curve &curve);

}  // namespace xltag

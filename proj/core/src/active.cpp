#include "xltag/active.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <tuple>

#include "xltag/error.hpp"

namespace xltag {

std::string_view strategy_name(Strategy s) {
    switch (s) {
        case Strategy::token: return "Token";
        case Strategy::sentence: return "Sent";
        case Strategy::freq_type: return "FreqType";
        case Strategy::sum_type: return "SumType";
        case Strategy::random: return "Random";
    }
    return "unknown";
}

Strategy parse_strategy(std::string_view name) {
    const std::string folded = fold_case(name);
    if (folded == "token") return Strategy::token;
    if (folded == "sent" || folded == "sentence") return Strategy::sentence;
    if (folded == "freqtype") return Strategy::freq_type;
    if (folded == "sumtype") return Strategy::sum_type;
    if (folded == "random") return Strategy::random;
    throw InputError("unknown strategy '" + std::string(name) + "' (Token, Sent, FreqType, SumType, Random)");
}

std::string_view base_name(Base b) { return b == Base::trad ? "Trad" : "Joint"; }

Base parse_base(std::string_view name) {
    const std::string folded = fold_case(name);
    if (folded == "trad") return Base::trad;
    if (folded == "joint") return Base::joint;
    throw InputError("unknown base '" + std::string(name) + "' (Trad or Joint)");
}

AnnotationPool::AnnotationPool(TaggedCorpus oracle) : oracle_(std::move(oracle)) {
    oracle_.validate();
    const std::size_t k = oracle_.tagset.size();
    std::map<std::string, std::vector<std::size_t>, std::less<>> counts;
    for (std::size_t s = 0; s < oracle_.sentences.size(); ++s) {
        const Sentence &sent = oracle_.sentences[s];
        if (sent.tags.size() != sent.tokens.size()) {
            throw InputError("pool: sentence " + std::to_string(s) + " lacks oracle tags");
        }
        revealed_.emplace_back(sent.size(), kNoTag);
        capacity_ += sent.size();
        for (std::size_t t = 0; t < sent.size(); ++t) {
            if (sent.tags[t] == kNoTag) throw InputError("pool: oracle corpus has a hidden tag");
            TypeInfo &ti = type_info_[sent.tokens[t]];
            ti.occurrences.push_back({s, t});
            auto &c = counts[sent.tokens[t]];
            c.resize(k, 0);
            ++c[static_cast<std::size_t>(sent.tags[t])];
        }
    }
    for (auto &[type, ti] : type_info_) {
        types_.push_back(type);
        ti.open = ti.occurrences.size();
        const auto &c = counts[type];
        ti.majority = static_cast<int>(std::max_element(c.begin(), c.end()) - c.begin());
    }
}

const AnnotationPool::TypeInfo &AnnotationPool::info(std::string_view type) const {
    auto it = type_info_.find(type);
    if (it == type_info_.end()) throw InputError("pool: unknown word type '" + std::string(type) + "'");
    return it->second;
}

const std::vector<Position> &AnnotationPool::occurrences(std::string_view type) const {
    return info(type).occurrences;
}

int AnnotationPool::majority_label(std::string_view type) const { return info(type).majority; }

bool AnnotationPool::type_open(std::string_view type) const { return info(type).open > 0; }

std::vector<std::string> AnnotationPool::annotated_types() const {
    std::vector<std::string> out;
    for (const auto &[type, ti] : type_info_)
        if (ti.open == 0) out.push_back(type);
    return out;
}

std::size_t AnnotationPool::unannotated_in_sentence(std::size_t s) const {
    const auto &r = revealed_.at(s);
    return static_cast<std::size_t>(std::count(r.begin(), r.end(), kNoTag));
}

bool AnnotationPool::reveal(Position p, int label) {
    int &slot = revealed_.at(p.sentence).at(p.index);
    if (slot != kNoTag) return false;
    if (label < 0 || static_cast<std::size_t>(label) >= oracle_.tagset.size()) {
        throw InputError("pool: label " + std::to_string(label) + " outside the tagset");
    }
    slot = label;
    ++budget_spent_;
    --type_info_.find(oracle_.sentences[p.sentence].tokens[p.index])->second.open;
    return true;
}

TaggedCorpus AnnotationPool::revealed_corpus() const {
    TaggedCorpus out;
    out.provenance = Provenance::gold;
    out.tagset = oracle_.tagset;
    for (std::size_t s = 0; s < revealed_.size(); ++s) {
        const auto &r = revealed_[s];
        if (std::all_of(r.begin(), r.end(), [](int t) { return t == kNoTag; })) continue;
        out.sentences.push_back(Sentence{oracle_.sentences[s].tokens, r});
    }
    return out;
}

double entropy(std::span<const double> probs) {
    double h = 0.0;
    for (double p : probs) {
        if (p > 0.0) h -= p * std::log(p);
    }
    return std::max(0.0, h);
}

double token_entropy(const Tagger &model, const EmbeddingSpace &space, const Sentence &sentence, std::size_t t) {
    if (t >= sentence.size()) throw InputError("token_entropy: position out of range");
    const auto probs = model.probabilities(space, sentence.tokens, model.evaluation_head());
    return entropy(probs[t].data());
}

EntropyTable pool_entropies(const Tagger &model, const EmbeddingSpace &space, const AnnotationPool &pool) {
    EntropyTable table;
    const Head head = model.evaluation_head();
    for (const auto &s : pool.oracle().sentences) {
        std::vector<double> row;
        if (!s.tokens.empty()) {
            for (const Tensor &p : model.probabilities(space, s.tokens, head)) row.push_back(entropy(p.data()));
        }
        table.push_back(std::move(row));
    }
    return table;
}

namespace {

std::string sentence_text(const Sentence &s) {
    std::string out;
    for (const auto &t : s.tokens) {
        if (!out.empty()) out += ' ';
        out += t;
    }
    return out;
}

}  // namespace

Selection select(Strategy strategy, const AnnotationPool &pool, const EntropyTable &entropies, Rng &rng) {
    if (pool.exhausted()) throw InputError("select: pool exhausted");
    const auto &sentences = pool.oracle().sentences;
    if (strategy != Strategy::freq_type && strategy != Strategy::random && entropies.size() != sentences.size()) {
        throw InputError("select: entropy table does not match the pool");
    }
    Selection best;
    bool found = false;

    switch (strategy) {
        case Strategy::token: {
            best.kind = SelectionKind::token;
            const std::string *best_word = nullptr;
            for (std::size_t s = 0; s < sentences.size(); ++s) {
                for (std::size_t t = 0; t < sentences[s].size(); ++t) {
                    const Position p{s, t};
                    if (pool.is_annotated(p)) continue;
                    const double h = entropies[s].at(t);
                    const std::string &w = sentences[s].tokens[t];
                    // Scan order already gives the lowest position among equal keys.
                    if (!found || h > best.score || (h == best.score && w < *best_word)) {
                        best.position = p;
                        best.score = h;
                        best_word = &w;
                        found = true;
                    }
                }
            }
            break;
        }
        case Strategy::sentence: {
            best.kind = SelectionKind::sentence;
            std::string best_text;
            for (std::size_t s = 0; s < sentences.size(); ++s) {
                if (pool.unannotated_in_sentence(s) == 0) continue;
                double total = 0.0;
                for (std::size_t t = 0; t < sentences[s].size(); ++t) {
                    if (!pool.is_annotated({s, t})) total += entropies[s].at(t);
                }
                if (!found || total > best.score) {
                    best.sentence = s;
                    best.score = total;
                    best_text = sentence_text(sentences[s]);
                    found = true;
                } else if (total == best.score) {
                    std::string text = sentence_text(sentences[s]);
                    if (text < best_text) {
                        best.sentence = s;
                        best_text = std::move(text);
                    }
                }
            }
            break;
        }
        case Strategy::freq_type:
        case Strategy::sum_type: {
            best.kind = SelectionKind::type;
            // Types are visited in lexicographic order, so strict > keeps the
            // smaller string on ties.
            for (const auto &type : pool.types()) {
                if (!pool.type_open(type)) continue;
                const auto &occ = pool.occurrences(type);
                double score = 0.0;
                if (strategy == Strategy::freq_type) {
                    score = static_cast<double>(occ.size());
                } else {
                    for (const Position &p : occ) score += entropies[p.sentence].at(p.index);
                }
                if (!found || score > best.score) {
                    best.type = type;
                    best.score = score;
                    found = true;
                }
            }
            break;
        }
        case Strategy::random: {
            best.kind = SelectionKind::type;
            std::vector<const std::string *> open;
            for (const auto &type : pool.types())
                if (pool.type_open(type)) open.push_back(&type);
            if (!open.empty()) {
                best.type = *open[rng.below(open.size())];
                found = true;
            }
            break;
        }
    }
    if (!found) throw InputError("select: pool exhausted");
    return best;
}

Selection select(Strategy strategy, const AnnotationPool &pool, const Tagger &model, const EmbeddingSpace &space,
                 Rng &rng) {
    EntropyTable table;
    if (strategy != Strategy::freq_type && strategy != Strategy::random) table = pool_entropies(model, space, pool);
    return select(strategy, pool, table, rng);
}

Annotation annotate(AnnotationPool &pool, const Selection &selection, std::size_t limit) {
    const auto &sentences = pool.oracle().sentences;
    Annotation out;
    auto reveal = [&](Position p, int label) {
        if (out.labels.size() >= limit) return;
        if (pool.reveal(p, label)) out.labels.emplace_back(p, label);
    };
    switch (selection.kind) {
        case SelectionKind::token: {
            const Position p = selection.position;
            if (p.sentence >= sentences.size() || p.index >= sentences[p.sentence].size()) {
                throw InputError("annotate: position out of range");
            }
            if (pool.is_annotated(p)) throw InputError("annotate: token already annotated");
            reveal(p, sentences[p.sentence].tags[p.index]);
            break;
        }
        case SelectionKind::sentence: {
            const std::size_t s = selection.sentence;
            if (s >= sentences.size()) throw InputError("annotate: sentence out of range");
            if (pool.unannotated_in_sentence(s) == 0) throw InputError("annotate: sentence already annotated");
            for (std::size_t t = 0; t < sentences[s].size(); ++t) reveal({s, t}, sentences[s].tags[t]);
            break;
        }
        case SelectionKind::type: {
            if (!pool.type_open(selection.type)) {
                throw InputError("annotate: type '" + selection.type + "' already annotated");
            }
            const int label = pool.majority_label(selection.type);
            for (const Position &p : pool.occurrences(selection.type)) reveal(p, label);
            break;
        }
    }
    return out;
}

Curve simulate(Strategy strategy, AnnotationPool pool, Base base, const SimulationData &data,
               const SimulationConfig &cfg) {
    if (!data.space || !data.dev || !data.test) throw InputError("simulate: embeddings, dev and test are required");
    if (base == Base::joint && (!data.distant || data.distant->labelled_count() == 0)) {
        throw InputError("simulate: the Joint base needs a distant corpus");
    }
    if (cfg.budgets.empty()) throw InputError("simulate: empty budget schedule");
    for (std::size_t i = 1; i < cfg.budgets.size(); ++i) {
        if (cfg.budgets[i] <= cfg.budgets[i - 1]) throw InputError("simulate: budget schedule must be strictly increasing");
    }

    const TagSet &tagset = pool.oracle().tagset;
    const EmbeddingSpace &space = *data.space;
    TrainConfig train_cfg = cfg.train;
    train_cfg.seed = cfg.seed;
    train_cfg.log_path.clear();
    const Tagger init(cfg.shape, tagset, space.space_id, cfg.seed);
    Rng rng = Rng(cfg.seed).fork(0xA11CE);

    auto retrain = [&]() -> Tagger {
        TaggedCorpus gold = pool.revealed_corpus();
        JointBatch batch;
        if (base == Base::trad) {
            if (gold.labelled_count() == 0) return init;
            batch.distant = std::move(gold);
            batch.distant.tagset = tagset;
        } else {
            batch.distant = *data.distant;
            batch.gold = std::move(gold);
        }
        return train(init, batch, *data.dev, space, train_cfg).model;
    };

    Curve curve;
    curve.strategy = strategy;
    curve.base = base;
    curve.seed = cfg.seed;

    Tagger model = retrain();
    std::size_t trained_at = pool.budget_spent();
    EntropyTable entropies;
    bool entropies_fresh = false;

    for (std::size_t budget : cfg.budgets) {
        if (budget > pool.capacity()) {
            curve.warnings.push_back("budget " + std::to_string(budget) + " exceeds the pool size " +
                                     std::to_string(pool.capacity()) + "; curve truncated");
            break;
        }
        while (pool.budget_spent() < budget) {
            if (!entropies_fresh && strategy != Strategy::freq_type && strategy != Strategy::random) {
                entropies = pool_entropies(model, space, pool);
            }
            entropies_fresh = true;
            const Selection sel = select(strategy, pool, entropies, rng);
            annotate(pool, sel, budget - pool.budget_spent());
        }
        if (pool.budget_spent() != trained_at) {
            model = retrain();
            trained_at = pool.budget_spent();
            entropies_fresh = false;
        }
        curve.points.push_back({budget, evaluate(model, space, *data.test, model.evaluation_head()).accuracy()});
    }
    curve.budget_spent = pool.budget_spent();
    return curve;
}

void write_curve(std::ostream &out, const Curve &curve) {
    for (const auto &p : curve.points) {
        out << strategy_name(curve.strategy) << '\t' << base_name(curve.base) << '\t' << curve.seed << '\t' << p.budget
            << '\t' << format_double(p.accuracy) << '\n';
    }
}

}  // namespace xltag

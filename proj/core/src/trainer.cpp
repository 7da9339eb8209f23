#include "xltag/trainer.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "xltag/error.hpp"
#include "xltag/rng.hpp"
#include "text_util.hpp"

namespace xltag {

void TrainConfig::validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw InputError("config: learning_rate must be a finite non-negative number");
    }
    if (!(momentum >= 0.0 && momentum < 1.0)) throw InputError("config: momentum must lie in [0, 1)");
    if (max_epochs < 1) throw InputError("config: max_epochs must be positive");
    if (patience < 1) throw InputError("config: patience must be positive");
    if (gamma_override && (!(*gamma_override >= 0.0) || !std::isfinite(*gamma_override))) {
        throw InputError("config: gamma_override must be a finite non-negative number");
    }
}

TrainConfig parse_train_config(std::istream &in, TrainConfig cfg) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = detail::trim(line);
        if (body.empty() || body[0] == '#') continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) {
            throw InputError("config: line " + std::to_string(line_no) + ": expected key=value");
        }
        const std::string key(detail::trim(body.substr(0, eq)));
        const std::string_view value = detail::trim(body.substr(eq + 1));
        auto bad = [&] { return InputError("config: line " + std::to_string(line_no) + ": bad value for " + key); };
        auto as_double = [&] {
            double v = 0.0;
            if (!detail::parse_double(value, v)) throw bad();
            return v;
        };
        auto as_int = [&] {
            std::size_t v = 0;
            if (!detail::parse_size(value, v) || v > 1000000000) throw bad();
            return static_cast<int>(v);
        };
        if (key == "learning_rate") {
            cfg.learning_rate = as_double();
        } else if (key == "momentum") {
            cfg.momentum = as_double();
        } else if (key == "max_epochs") {
            cfg.max_epochs = as_int();
        } else if (key == "patience") {
            cfg.patience = as_int();
        } else if (key == "seed") {
            std::uint64_t v = 0;
            auto res = std::from_chars(value.data(), value.data() + value.size(), v);
            if (res.ec != std::errc() || res.ptr != value.data() + value.size()) throw bad();
            cfg.seed = v;
        } else if (key == "gamma_override") {
            if (value.empty() || value == "none") {
                cfg.gamma_override.reset();
            } else {
                cfg.gamma_override = as_double();
            }
        } else if (key == "log_path") {
            cfg.log_path = std::string(value);
        } else {
            throw InputError("config: line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
    }
    cfg.validate();
    return cfg;
}

TrainConfig load_train_config_file(const std::string &path, TrainConfig base) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file: " + path);
    return parse_train_config(in, std::move(base));
}

void write_train_config(std::ostream &out, const TrainConfig &cfg) {
    out << "learning_rate=" << format_double(cfg.learning_rate) << '\n';
    out << "momentum=" << format_double(cfg.momentum) << '\n';
    out << "max_epochs=" << cfg.max_epochs << '\n';
    out << "patience=" << cfg.patience << '\n';
    out << "seed=" << cfg.seed << '\n';
    out << "gamma_override=" << (cfg.gamma_override ? format_double(*cfg.gamma_override) : "none") << '\n';
    out << "log_path=" << cfg.log_path << '\n';
}

double gamma(std::size_t gold_tokens, std::size_t distant_tokens) {
    if (distant_tokens == 0) {
        throw InputError("gamma: distant corpus has no tokens; disable the distant term instead");
    }
    return static_cast<double>(gold_tokens) / static_cast<double>(distant_tokens);
}

namespace {

struct Example {
    std::vector<std::size_t> words;
    const std::vector<int> *tags = nullptr;
    bool gold = false;
};

std::vector<std::size_t> indices_of(const EmbeddingSpace &space, const Sentence &s) {
    std::vector<std::size_t> idx;
    idx.reserve(s.size());
    for (const auto &t : s.tokens) idx.push_back(space.index(t));
    return idx;
}

void check_tagset(const Tagger &model, const TaggedCorpus &corpus, const char *what) {
    if (!(corpus.tagset == model.tagset()) && !corpus.empty()) {
        throw InputError(std::string(what) + " corpus tagset differs from the model tagset");
    }
}

// Loss of one sentence, or an invalid Expr (id 0 with `ok` false) when no
// position is labelled.
bool sentence_loss(ad::Graph &g, const Tagger &model, const BoundTagger &w, const EmbeddingSpace &space,
                   std::span<const std::size_t> words, const std::vector<int> &tags, bool gold, double weight,
                   ad::Expr &loss) {
    bool any = false;
    for (int t : tags) any = any || t != kNoTag;
    if (!any) return false;
    const auto xs = model.embed(g, space, words);
    const auto hs = model.encode(g, w, xs);
    ad::Expr total{};
    bool first = true;
    for (std::size_t i = 0; i < hs.size(); ++i) {
        if (tags[i] == kNoTag) continue;
        ad::Expr probs = model.distant_head(g, w, hs[i]);
        if (gold) probs = model.gold_head(g, w, probs);
        const ad::Expr ce = g.cross_entropy(probs, static_cast<std::size_t>(tags[i]));
        total = first ? ce : g.add(total, ce);
        first = false;
    }
    loss = weight == 1.0 ? total : g.scale(total, weight);
    return true;
}

}  // namespace

ad::Expr joint_loss(ad::Graph &g, Tagger &model, const EmbeddingSpace &space, const JointBatch &batch, double gamma) {
    if (batch.distant.labelled_count() == 0 && batch.gold.labelled_count() == 0) {
        throw InputError("joint_loss: both corpora are empty");
    }
    check_tagset(model, batch.distant, "distant");
    check_tagset(model, batch.gold, "gold");
    const BoundTagger w = model.bind(g);
    ad::Expr total{};
    bool first = true;
    auto accumulate = [&](const TaggedCorpus &corpus, bool gold, double weight) {
        for (const auto &s : corpus.sentences) {
            if (!s.labelled()) continue;
            ad::Expr loss;
            if (!sentence_loss(g, model, w, space, indices_of(space, s), s.tags, gold, weight, loss)) continue;
            total = first ? loss : g.add(total, loss);
            first = false;
        }
    };
    accumulate(batch.distant, false, gamma);
    accumulate(batch.gold, true, 1.0);
    return total;
}

std::string format_epoch(const EpochRecord &r) {
    return std::to_string(r.epoch) + '\t' + format_double(r.train_loss) + '\t' + format_double(r.dev_accuracy) + '\t' +
           format_double(r.gamma) + '\t' + std::to_string(r.clipped_steps);
}

void write_train_log(std::ostream &out, const TrainLog &log) {
    for (const auto &r : log.epochs) out << format_epoch(r) << '\n';
}

Evaluation evaluate(const Tagger &model, const EmbeddingSpace &space, const TaggedCorpus &corpus, Head head) {
    check_tagset(model, corpus, "evaluation");
    Evaluation ev;
    const std::size_t k = model.num_tags();
    ev.confusion.assign(k, std::vector<std::size_t>(k, 0));
    for (const auto &s : corpus.sentences) {
        if (!s.labelled() || s.tokens.empty()) continue;
        const auto probs = model.probabilities(space, indices_of(space, s), head);
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s.tags[i] == kNoTag) continue;
            const auto gold = static_cast<std::size_t>(s.tags[i]);
            const auto pred = static_cast<std::size_t>(argmax(probs[i].data()));
            ++ev.confusion[gold][pred];
            ++ev.total;
            ev.correct += gold == pred;
        }
    }
    return ev;
}

TrainResult train(const Tagger &init, const JointBatch &data, const TaggedCorpus &dev, const EmbeddingSpace &space,
                  const TrainConfig &cfg) {
    cfg.validate();
    if (dev.labelled_count() == 0) throw InputError("train: development corpus has no labelled tokens");
    check_tagset(init, data.distant, "distant");
    check_tagset(init, data.gold, "gold");
    check_tagset(init, dev, "development");

    const std::size_t n_distant = data.distant.labelled_count();
    const std::size_t n_gold = data.gold.labelled_count();
    if (n_distant == 0 && n_gold == 0) throw InputError("train: no labelled tokens in either corpus");
    double weight = 0.0;
    if (n_distant > 0) weight = cfg.gamma_override ? *cfg.gamma_override : (n_gold > 0 ? gamma(n_gold, n_distant) : 1.0);
    const bool has_gold = n_gold > 0;
    const Head dev_head = has_gold ? Head::gold : Head::distant;

    std::vector<Example> examples;
    for (const auto &s : data.distant.sentences) {
        if (s.labelled()) examples.push_back({indices_of(space, s), &s.tags, false});
    }
    for (const auto &s : data.gold.sentences) {
        if (s.labelled()) examples.push_back({indices_of(space, s), &s.tags, true});
    }

    Tagger model = init;
    model.set_gold_trained(has_gold);
    auto params = model.params().all();
    std::vector<Tensor> velocity;
    for (auto *p : params) {
        p->grad = p->value.zeros_like();
        velocity.push_back(p->value.zeros_like());
    }

    std::ofstream log_file;
    if (!cfg.log_path.empty()) {
        log_file.open(cfg.log_path, std::ios::binary);
        if (!log_file) throw InputError("cannot write training log: " + cfg.log_path);
    }

    Rng rng(cfg.seed);
    std::vector<std::size_t> order(examples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    TrainResult result;
    result.log.best_dev_accuracy = -1.0;
    double last_finite = 0.0;
    int since_best = 0;
    ad::Graph g;

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        rng.shuffle(std::span<std::size_t>(order));
        EpochRecord rec;
        rec.epoch = epoch;
        rec.gamma = weight;
        for (std::size_t idx : order) {
            const Example &ex = examples[idx];
            g.clear();
            const BoundTagger w = model.bind(g);
            ad::Expr loss;
            if (!sentence_loss(g, model, w, space, ex.words, *ex.tags, ex.gold, ex.gold ? 1.0 : weight, loss)) continue;
            const double value = g.value(loss)[0];
            if (!std::isfinite(value)) {
                throw DivergenceError("train: non-finite loss in epoch " + std::to_string(epoch) +
                                          " (last finite epoch loss " + format_double(last_finite) + ")",
                                      epoch, last_finite);
            }
            rec.train_loss += value;
            g.backward(loss);
            rec.clamp_events += g.clamp_events();

            double norm_sq = 0.0;
            for (auto *p : params)
                for (double v : p->grad.data()) norm_sq += v * v;
            double scale = 1.0;
            if (std::sqrt(norm_sq) > kClipNorm) {
                scale = kClipNorm / std::sqrt(norm_sq);
                ++rec.clipped_steps;
            }
            for (std::size_t i = 0; i < params.size(); ++i) {
                auto value_span = params[i]->value.data();
                auto grad_span = params[i]->grad.data();
                auto vel = velocity[i].data();
                for (std::size_t j = 0; j < vel.size(); ++j) {
                    vel[j] = cfg.momentum * vel[j] - cfg.learning_rate * scale * grad_span[j];
                    value_span[j] += vel[j];
                    grad_span[j] = 0.0;
                }
            }
        }
        if (!std::isfinite(rec.train_loss)) {
            throw DivergenceError("train: non-finite loss in epoch " + std::to_string(epoch), epoch, last_finite);
        }
        last_finite = rec.train_loss;
        rec.dev_accuracy = evaluate(model, space, dev, dev_head).accuracy() / 100.0;
        result.log.epochs.push_back(rec);
        if (log_file) log_file << format_epoch(rec) << '\n';

        if (rec.dev_accuracy > result.log.best_dev_accuracy) {
            result.log.best_dev_accuracy = rec.dev_accuracy;
            result.log.best_epoch = epoch;
            result.model = model;
            since_best = 0;
        } else if (++since_best >= cfg.patience) {
            break;
        }
    }
    for (auto *p : result.model.params().all()) p->grad = p->value.zeros_like();
    return result;
}

DistantResult generate_distant_data(const Tagger &source_model, const TaggedCorpus &target_corpus,
                                    const EmbeddingSpace &target_space) {
    if (source_model.space_id() != target_space.space_id) {
        throw InputError("distant tagging: model was trained in embedding space '" + source_model.space_id() +
                         "' but target embeddings are in space '" + target_space.space_id + "'");
    }
    DistantResult out;
    out.corpus.provenance = Provenance::distant;
    out.corpus.tagset = source_model.tagset();
    out.tag_counts.assign(source_model.num_tags(), 0);
    for (const auto &s : target_corpus.sentences) {
        if (s.tokens.empty()) continue;
        Sentence tagged{s.tokens, source_model.predict(target_space, s.tokens, Head::distant)};
        for (int t : tagged.tags) ++out.tag_counts[static_cast<std::size_t>(t)];
        out.corpus.sentences.push_back(std::move(tagged));
    }
    return out;
}

}  // namespace xltag

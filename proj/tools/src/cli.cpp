#include "cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <system_error>

#include <openssl/evp.h>
#include <CLI11.hpp>
#include <json.hpp>

#include "xltag/active.hpp"
#include "xltag/cca.hpp"
#include "xltag/corpus.hpp"
#include "xltag/embed.hpp"
#include "xltag/error.hpp"
#include "xltag/tagger.hpp"
#include "xltag/trainer.hpp"

#ifndef XLTAG_VERSION
#define XLTAG_VERSION "unknown"
#endif

namespace xltag::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string file_digest(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open input file: " + path);
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("sha256 unavailable");
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), md, &len);
    std::string hex;
    char byte[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(byte, sizeof byte, "%02x", md[i]);
        hex += byte;
    }
    return hex;
}

namespace {

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string percent(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return buf;
}

// Model and run settings. Training keys are handled by the trainer's own
// parser; the rest are read here.
struct Settings {
    TrainConfig train;
    TaggerShape shape;
    bool lowercase = true;
};

Settings load_settings(const std::string &path) {
    Settings s;
    if (path.empty()) return s;
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file: " + path);
    std::ostringstream rest;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        const auto eq = t.find('=');
        const std::string key = eq == std::string::npos ? "" : trim(t.substr(0, eq));
        const std::string value = eq == std::string::npos ? "" : trim(t.substr(eq + 1));
        auto bad = [&] {
            return InputError("config: line " + std::to_string(line_no) + ": bad value for " + key);
        };
        auto count = [&] {
            std::size_t used = 0;
            unsigned long v = 0;
            try {
                v = std::stoul(value, &used);
            } catch (const std::exception &) {
                throw bad();
            }
            if (used != value.size() || v == 0) throw bad();
            return static_cast<std::size_t>(v);
        };
        if (key == "hidden") {
            s.shape.hidden = count();
        } else if (key == "mlp_hidden") {
            s.shape.mlp_hidden = count();
        } else if (key == "head_variant") {
            s.shape.variant = parse_head_variant(value);
        } else if (key == "lowercase") {
            if (value != "true" && value != "false") throw bad();
            s.lowercase = value == "true";
        } else {
            rest << line;
        }
        // Keep line numbers aligned for the trainer's messages.
        rest << '\n';
    }
    std::istringstream train_in(rest.str());
    s.train = parse_train_config(train_in);
    return s;
}

json settings_json(const Settings &s) {
    return {{"learning_rate", s.train.learning_rate},
            {"momentum", s.train.momentum},
            {"max_epochs", s.train.max_epochs},
            {"patience", s.train.patience},
            {"gamma_override", s.train.gamma_override ? json(*s.train.gamma_override) : json(nullptr)},
            {"hidden", s.shape.hidden},
            {"mlp_hidden", s.shape.mlp_hidden},
            {"head_variant", std::string(head_variant_name(s.shape.variant))},
            {"lowercase", s.lowercase}};
}

// One command invocation: its manifest and every file it writes. Files
// written by a run that did not finish are removed.
class Run {
public:
    Run(std::string command, std::uint64_t seed, std::string out_dir)
        : command_(std::move(command)), seed_(seed), out_dir_(std::move(out_dir)) {}

    Run(const Run &) = delete;
    Run &operator=(const Run &) = delete;

    ~Run() {
        if (finished_) return;
        std::error_code ec;
        for (const auto &p : written_) fs::remove(p, ec);
        if (created_dir_) fs::remove(out_dir_, ec);  // only succeeds when empty
    }

    json config = json::object();

    void input(const std::string &flag, const std::string &path) {
        inputs_[flag] = {{"path", path}, {"sha256", file_digest(path)}};
    }

    /// Creates the output directory and writes the manifest.
    void begin() {
        if (out_dir_.empty()) return;
        std::error_code ec;
        if (!fs::exists(out_dir_)) {
            fs::create_directories(out_dir_, ec);
            if (ec) throw InputError("cannot create output directory " + out_dir_.string() + ": " + ec.message());
            created_dir_ = true;
        } else if (!fs::is_directory(out_dir_)) {
            throw InputError("output path is not a directory: " + out_dir_.string());
        }
        const json manifest = {{"command", command_},
                               {"version", XLTAG_VERSION},
                               {"seed", seed_},
                               {"config", config},
                               {"inputs", inputs_}};
        write("manifest.json", [&](std::ostream &out) { out << manifest.dump(2) << '\n'; });
    }

    fs::path output(const std::string &name) {
        fs::path p = out_dir_ / name;
        written_.push_back(p);
        return p;
    }

    template <typename Body>
    void write(const std::string &name, Body &&body) {
        const fs::path p = output(name);
        std::ofstream out(p, std::ios::binary);
        if (!out) throw InputError("cannot write " + p.string());
        body(out);
        out.flush();
        if (!out) throw InputError("failed writing " + p.string());
    }

    void finish() { finished_ = true; }
    bool has_out_dir() const { return !out_dir_.empty(); }

private:
    std::string command_;
    std::uint64_t seed_;
    fs::path out_dir_;
    json inputs_ = json::object();
    std::vector<fs::path> written_;
    bool created_dir_ = false;
    bool finished_ = false;
};

std::string space_sidecar(const std::string &path) { return path + ".space"; }

// Embeddings plus the id of the space they live in, taken from the sidecar
// file when present and from the content digest otherwise.
EmbeddingSpace load_space(const std::string &path, bool lowercase, Run &run, const std::string &flag,
                          std::ostream &err) {
    run.input(flag, path);
    auto loaded = load_embeddings_file(path);
    for (const auto &w : loaded.warnings) err << "warning: " << path << ": " << w << '\n';
    std::string id;
    if (std::ifstream side(space_sidecar(path)); side) {
        run.input(flag + ".space", space_sidecar(path));
        std::getline(side, id);
        id = trim(id);
    }
    if (id.empty()) id = "sha256:" + file_digest(path).substr(0, 16);
    return EmbeddingSpace{std::move(loaded.vocab), std::move(loaded.matrix), id, lowercase};
}

TaggedCorpus load_tagged(const std::string &path, const std::optional<TagMapping> &mapping, const TagSet &target,
                         Run &run, const std::string &flag) {
    run.input(flag, path);
    const TaggedCorpus raw = read_conll_file(path);
    return mapping ? map_tags(raw, *mapping, target) : retag(raw, target);
}

std::optional<TagMapping> load_mapping(const std::string &path, Run &run) {
    if (path.empty()) return std::nullopt;
    run.input("--mapping", path);
    return load_tag_mapping_file(path);
}

void write_projection(std::ostream &out, const Tensor &projection, const Tensor &mean) {
    out << projection.rows() << ' ' << projection.cols() << '\n';
    for (std::size_t i = 0; i < projection.rows(); ++i) {
        for (std::size_t j = 0; j < projection.cols(); ++j) out << (j ? " " : "") << format_double(projection.at(i, j));
        out << '\n';
    }
    out << "mean";
    for (double v : mean.data()) out << ' ' << format_double(v);
    out << '\n';
}

std::string eval_report(const Evaluation &ev, const TagSet &tags) {
    std::ostringstream out;
    out << "accuracy\t" << percent(ev.accuracy()) << "\t(" << ev.correct << '/' << ev.total << ")\n";
    out << "tag\tcorrect/total\taccuracy\tconfused_with\n";
    for (std::size_t g = 0; g < tags.size(); ++g) {
        std::size_t total = 0;
        for (std::size_t n : ev.confusion[g]) total += n;
        if (total == 0) continue;
        const std::size_t correct = ev.confusion[g][g];
        out << tags.tag(g) << '\t' << correct << '/' << total << '\t'
            << percent(100.0 * static_cast<double>(correct) / static_cast<double>(total)) << '\t';
        // Wrong predictions, most frequent first, ties by tag index.
        std::vector<std::pair<std::size_t, std::size_t>> wrong;
        for (std::size_t p = 0; p < tags.size(); ++p) {
            if (p != g && ev.confusion[g][p] > 0) wrong.emplace_back(ev.confusion[g][p], p);
        }
        std::stable_sort(wrong.begin(), wrong.end(), [](auto &a, auto &b) { return a.first > b.first; });
        if (wrong.empty()) out << '-';
        for (std::size_t i = 0; i < wrong.size() && i < 3; ++i) {
            out << (i ? " " : "") << tags.tag(wrong[i].second) << ':' << wrong[i].first;
        }
        out << '\n';
    }
    return out.str();
}

// Options shared by every command.
struct Common {
    std::uint64_t seed = 1;
    std::string config;
    std::string out_dir;
    CLI::Option *seed_opt = nullptr;
};

void add_common(CLI::App *cmd, Common &c, bool out_dir_required) {
    c.seed_opt = cmd->add_option("--seed", c.seed, "Seed for every random choice (default 1, or the config's seed)");
    cmd->add_option("--config", c.config, "key=value file: training keys plus hidden, mlp_hidden, head_variant, "
                                          "lowercase");
    auto *o = cmd->add_option("--out-dir", c.out_dir, "Directory for every output file");
    if (out_dir_required) o->required();
}

// --seed wins over the config file's seed.
Settings resolve(const Common &c) {
    Settings s = load_settings(c.config);
    if (c.seed_opt->count() || c.config.empty()) s.train.seed = c.seed;
    return s;
}

struct AlignArgs {
    Common common;
    std::string src, tgt, lexicon;
    std::size_t k = 0;
};

int cmd_align(const AlignArgs &a, std::ostream &out, std::ostream &err) {
    const Settings s = resolve(a.common);
    const std::uint64_t seed = s.train.seed;
    Run run("align", seed, a.common.out_dir);
    run.config = {{"k", a.k}, {"lowercase", s.lowercase}};
    run.input("--lexicon", a.lexicon);
    const EmbeddingSpace src = load_space(a.src, s.lowercase, run, "--src-emb", err);
    const EmbeddingSpace tgt = load_space(a.tgt, s.lowercase, run, "--tgt-emb", err);
    const BilingualLexicon lex = load_lexicon_file(a.lexicon);
    const CcaResult r = cca_align(src, tgt, lex, a.k);
    if (r.regularized) err << "warning: covariance was rank deficient; a ridge term was added\n";

    run.begin();
    // Both projected spaces share one id so taggers trained on one accept the other.
    const std::string id = "cca:" + file_digest(a.src).substr(0, 12) + ":" + file_digest(a.tgt).substr(0, 12) + ":" +
                           std::to_string(r.correlations.size());
    const auto src_proj = project(src.matrix, r.src_projection, r.src_mean);
    const auto tgt_proj = project(tgt.matrix, r.tgt_projection, r.tgt_mean);
    run.write("src.vec", [&](std::ostream &o) { write_embeddings(o, src.vocab, src_proj); });
    run.write("src.vec.space", [&](std::ostream &o) { o << id << '\n'; });
    run.write("tgt.vec", [&](std::ostream &o) { write_embeddings(o, tgt.vocab, tgt_proj); });
    run.write("tgt.vec.space", [&](std::ostream &o) { o << id << '\n'; });
    run.write("src.projection", [&](std::ostream &o) { write_projection(o, r.src_projection, r.src_mean); });
    run.write("tgt.projection", [&](std::ostream &o) { write_projection(o, r.tgt_projection, r.tgt_mean); });
    std::ostringstream report;
    report << "# pairs_used=" << r.pairs_used << " regularized=" << (r.regularized ? "yes" : "no") << '\n';
    report << "component\tcorrelation\n";
    for (std::size_t i = 0; i < r.correlations.size(); ++i) {
        report << i << '\t' << format_double(r.correlations[i]) << '\n';
    }
    run.write("alignment.tsv", [&](std::ostream &o) { o << report.str(); });
    out << report.str();
    run.finish();
    return kOk;
}

struct TrainSourceArgs {
    Common common;
    std::string train, dev, embeddings, mapping;
};

int cmd_train_source(const TrainSourceArgs &a, std::ostream &out, std::ostream &err) {
    Settings s = resolve(a.common);
    const std::uint64_t seed = s.train.seed;
    Run run("train-source", seed, a.common.out_dir);
    const TagSet universal = TagSet::universal();
    const auto mapping = load_mapping(a.mapping, run);
    TaggedCorpus train_set = load_tagged(a.train, mapping, universal, run, "--train");
    TaggedCorpus dev;
    if (!a.dev.empty()) {
        dev = load_tagged(a.dev, mapping, universal, run, "--dev");
    } else {
        if (train_set.sentences.size() <= kDevSentences) {
            throw InputError("train-source: " + a.train + " has " + std::to_string(train_set.sentences.size()) +
                             " sentences; more than " + std::to_string(kDevSentences) +
                             " are needed to hold out a development set, or pass --dev");
        }
        dev.tagset = universal;
        dev.sentences.assign(train_set.sentences.end() - static_cast<std::ptrdiff_t>(kDevSentences),
                             train_set.sentences.end());
        train_set.sentences.resize(train_set.sentences.size() - kDevSentences);
    }
    const EmbeddingSpace space = load_space(a.embeddings, s.lowercase, run, "--embeddings", err);
    s.shape.input_dim = space.dim();
    run.config = settings_json(s);
    run.config["held_out_dev"] = a.dev.empty();

    run.begin();
    s.train.log_path = run.output("train.log").string();
    JointBatch batch;
    batch.distant = std::move(train_set);
    batch.gold.tagset = universal;
    const Tagger init(s.shape, universal, space.space_id, seed);
    const TrainResult result = train(init, batch, dev, space, s.train);
    result.model.save_file(run.output("source.model").string());
    out << "best_epoch\t" << result.log.best_epoch << "\ndev_accuracy\t" << percent(100.0 * result.log.best_dev_accuracy)
        << '\n';
    run.finish();
    return kOk;
}

struct DistantTagArgs {
    Common common;
    std::string model, corpus, embeddings, format = "plain";
};

int cmd_distant_tag(const DistantTagArgs &a, std::ostream &out, std::ostream &err) {
    const Settings s = resolve(a.common);
    const std::uint64_t seed = s.train.seed;
    Run run("distant-tag", seed, a.common.out_dir);
    run.config = {{"format", a.format}, {"lowercase", s.lowercase}};
    run.input("--model", a.model);
    run.input("--corpus", a.corpus);
    const Tagger model = Tagger::load_file(a.model);
    TaggedCorpus text;
    if (a.format == "plain") {
        std::ifstream in(a.corpus);
        if (!in) throw InputError("cannot open corpus file: " + a.corpus);
        text = read_plain(in);
    } else {
        text = strip_tags(read_conll_file(a.corpus));
    }
    const EmbeddingSpace space = load_space(a.embeddings, s.lowercase, run, "--embeddings", err);
    const DistantResult r = generate_distant_data(model, text, space);

    run.begin();
    run.write("distant.conll", [&](std::ostream &o) { write_conll(o, r.corpus); });
    std::ostringstream counts;
    counts << "tag\tcount\n";
    for (std::size_t t = 0; t < r.tag_counts.size(); ++t) counts << model.tagset().tag(t) << '\t' << r.tag_counts[t] << '\n';
    run.write("tag_counts.tsv", [&](std::ostream &o) { o << counts.str(); });
    out << "sentences\t" << r.corpus.sentences.size() << "\ntokens\t" << r.corpus.token_count() << '\n';
    run.finish();
    return kOk;
}

struct TrainJointArgs {
    Common common;
    std::string gold, dev, distant, embeddings, mapping;
    bool allow_no_gold = false;
};

int cmd_train_joint(const TrainJointArgs &a, std::ostream &out, std::ostream &err) {
    Settings s = resolve(a.common);
    const std::uint64_t seed = s.train.seed;
    Run run("train-joint", seed, a.common.out_dir);
    const TagSet universal = TagSet::universal();
    const auto mapping = load_mapping(a.mapping, run);

    TaggedCorpus gold, dev;
    gold.tagset = universal;
    if (!a.gold.empty()) {
        TaggedCorpus all = load_tagged(a.gold, mapping, universal, run, "--gold");
        if (!a.dev.empty()) {
            gold = std::move(all);
        } else {
            CorpusSplit split = split_corpus(all);
            gold = std::move(split.gold_train);
            dev = std::move(split.dev);
        }
    }
    if (!a.dev.empty()) dev = load_tagged(a.dev, mapping, universal, run, "--dev");
    if (a.dev.empty() && a.gold.empty()) throw InputError("train-joint: --dev is required without --gold");
    if (gold.labelled_count() == 0 && !a.allow_no_gold) {
        throw InputError("train-joint: no gold sentences; pass --allow-no-gold to train on distant data only");
    }
    run.input("--distant", a.distant);
    TaggedCorpus distant = retag(read_conll_file(a.distant), universal);
    distant.provenance = Provenance::distant;
    const EmbeddingSpace space = load_space(a.embeddings, s.lowercase, run, "--embeddings", err);
    s.shape.input_dim = space.dim();
    run.config = settings_json(s);
    run.config["allow_no_gold"] = a.allow_no_gold;
    run.config["gold_sentences"] = gold.sentences.size();
    run.config["dev_sentences"] = dev.sentences.size();

    run.begin();
    s.train.log_path = run.output("train.log").string();
    const Tagger init(s.shape, universal, space.space_id, seed);
    const TrainResult result = train(init, JointBatch{std::move(distant), std::move(gold)}, dev, space, s.train);
    result.model.save_file(run.output("joint.model").string());
    const double g = result.log.epochs.empty() ? 0.0 : result.log.epochs.front().gamma;
    out << "gamma\t" << format_double(g) << "\nbest_epoch\t" << result.log.best_epoch << "\ndev_accuracy\t"
        << percent(100.0 * result.log.best_dev_accuracy) << '\n';
    run.finish();
    return kOk;
}

struct ActiveArgs {
    Common common;
    std::string pool, distant, dev, test, embeddings, mapping;
    std::vector<std::string> strategies{"SumType"};
    std::vector<std::string> bases{"Joint"};
    std::vector<std::size_t> budgets{10, 30, 100};
    std::size_t seeds = 1;
};

int cmd_active(const ActiveArgs &a, std::ostream &out, std::ostream &err) {
    Settings s = resolve(a.common);
    const std::uint64_t seed = s.train.seed;
    Run run("active-learn", seed, a.common.out_dir);
    std::vector<Strategy> strategies;
    for (const auto &n : a.strategies) strategies.push_back(parse_strategy(n));
    std::vector<Base> bases;
    for (const auto &n : a.bases) bases.push_back(parse_base(n));
    if (a.seeds == 0) throw InputError("active-learn: --seeds must be positive");

    const TagSet universal = TagSet::universal();
    const auto mapping = load_mapping(a.mapping, run);
    const TaggedCorpus pool = load_tagged(a.pool, mapping, universal, run, "--pool");
    const TaggedCorpus dev = load_tagged(a.dev, mapping, universal, run, "--dev");
    const TaggedCorpus test = load_tagged(a.test, mapping, universal, run, "--test");
    TaggedCorpus distant;
    if (!a.distant.empty()) {
        run.input("--distant", a.distant);
        distant = retag(read_conll_file(a.distant), universal);
        distant.provenance = Provenance::distant;
    }
    const EmbeddingSpace space = load_space(a.embeddings, s.lowercase, run, "--embeddings", err);
    s.shape.input_dim = space.dim();
    run.config = settings_json(s);
    run.config["strategies"] = a.strategies;
    run.config["bases"] = a.bases;
    run.config["budgets"] = a.budgets;
    run.config["seeds"] = a.seeds;

    run.begin();
    const SimulationData data{&space, a.distant.empty() ? nullptr : &distant, &dev, &test};
    std::ostringstream curves;
    curves << "strategy\tbase\tseed\tbudget\taccuracy\n";
    for (std::size_t i = 0; i < a.seeds; ++i) {
        SimulationConfig cfg{s.shape, s.train, a.budgets, seed + i};
        for (Base b : bases) {
            for (Strategy st : strategies) {
                const Curve c = simulate(st, AnnotationPool(pool), b, data, cfg);
                for (const auto &w : c.warnings) err << "warning: " << w << '\n';
                write_curve(curves, c);
            }
        }
    }
    run.write("curve.tsv", [&](std::ostream &o) { o << curves.str(); });
    out << curves.str();
    run.finish();
    return kOk;
}

struct EvalArgs {
    Common common;
    std::string model, corpus, embeddings, mapping, head = "auto";
};

int cmd_eval(const EvalArgs &a, std::ostream &out, std::ostream &err) {
    const Settings s = resolve(a.common);
    const std::uint64_t seed = s.train.seed;
    Run run("eval", seed, a.common.out_dir);
    run.config = {{"head", a.head}, {"lowercase", s.lowercase}};
    run.input("--model", a.model);
    const Tagger model = Tagger::load_file(a.model);
    const auto mapping = load_mapping(a.mapping, run);
    run.input("--corpus", a.corpus);
    TaggedCorpus corpus = read_conll_file(a.corpus);
    if (mapping) corpus = map_tags(corpus, *mapping, TagSet::universal());
    for (const auto &t : corpus.tagset.tags()) {
        if (!model.tagset().find(t)) throw InputError("eval: corpus tag " + t + " is not in the model's tagset");
    }
    corpus = retag(corpus, model.tagset());
    const EmbeddingSpace space = load_space(a.embeddings, s.lowercase, run, "--embeddings", err);
    if (space.space_id != model.space_id()) {
        throw InputError("eval: model was trained in embedding space '" + model.space_id() + "' but " + a.embeddings +
                         " is in space '" + space.space_id + "'");
    }
    Head head = model.evaluation_head();
    if (a.head == "gold") head = Head::gold;
    if (a.head == "distant") head = Head::distant;

    const std::string report = eval_report(evaluate(model, space, corpus, head), model.tagset());
    if (run.has_out_dir()) {
        run.begin();
        run.write("eval.txt", [&](std::ostream &o) { o << report; });
    }
    out << report;
    run.finish();
    return kOk;
}

}  // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"Low-resource POS tagging with joint distant and gold supervision", "xltag"};
    app.set_version_flag("--version", XLTAG_VERSION);
    app.require_subcommand(1);

    AlignArgs align;
    auto *c_align = app.add_subcommand("align", "CCA-align two embedding spaces through a bilingual lexicon");
    add_common(c_align, align.common, true);
    c_align->add_option("--src-emb", align.src, "Source embeddings (word2vec text)")->required();
    c_align->add_option("--tgt-emb", align.tgt, "Target embeddings (word2vec text)")->required();
    c_align->add_option("--lexicon", align.lexicon, "source<TAB>target pairs")->required();
    c_align->add_option("--k", align.k, "Number of canonical components (0: min of the dimensions)");

    TrainSourceArgs src;
    auto *c_src = app.add_subcommand("train-source", "Train the source tagger on annotated source text");
    add_common(c_src, src.common, true);
    c_src->add_option("--train", src.train, "Annotated CoNLL corpus")->required();
    c_src->add_option("--embeddings", src.embeddings, "Embeddings in the aligned space")->required();
    c_src->add_option("--dev", src.dev, "Development CoNLL corpus (default: last 20 training sentences)");
    c_src->add_option("--mapping", src.mapping, "Fine-to-universal tag mapping");

    DistantTagArgs dist;
    auto *c_dist = app.add_subcommand("distant-tag", "Tag target text with the source tagger");
    add_common(c_dist, dist.common, true);
    c_dist->add_option("--model", dist.model, "Source tagger")->required();
    c_dist->add_option("--corpus", dist.corpus, "Target text")->required();
    c_dist->add_option("--embeddings", dist.embeddings, "Target embeddings in the aligned space")->required();
    c_dist->add_option("--format", dist.format, "plain (one sentence per line) or conll")
        ->check(CLI::IsMember({"plain", "conll"}));

    TrainJointArgs joint;
    auto *c_joint = app.add_subcommand("train-joint", "Train the joint tagger on distant and gold data");
    add_common(c_joint, joint.common, true);
    c_joint->add_option("--gold", joint.gold,
                        "Gold CoNLL corpus; without --dev it is split into 20 gold and 20 dev sentences");
    c_joint->add_option("--dev", joint.dev, "Development CoNLL corpus");
    c_joint->add_option("--distant", joint.distant, "Distantly tagged CoNLL corpus")->required();
    c_joint->add_option("--embeddings", joint.embeddings, "Target embeddings")->required();
    c_joint->add_option("--mapping", joint.mapping, "Fine-to-universal tag mapping for gold and dev");
    c_joint->add_flag("--allow-no-gold", joint.allow_no_gold, "Train on distant data alone when there is no gold");

    ActiveArgs al;
    auto *c_al = app.add_subcommand("active-learn", "Simulate active learning against an oracle pool");
    add_common(c_al, al.common, true);
    c_al->add_option("--pool", al.pool, "Oracle CoNLL pool")->required();
    c_al->add_option("--distant", al.distant, "Distantly tagged CoNLL corpus (Joint base)");
    c_al->add_option("--dev", al.dev, "Development CoNLL corpus")->required();
    c_al->add_option("--test", al.test, "Test CoNLL corpus")->required();
    c_al->add_option("--embeddings", al.embeddings, "Target embeddings")->required();
    c_al->add_option("--mapping", al.mapping, "Fine-to-universal tag mapping");
    c_al->add_option("--strategy", al.strategies, "Token, Sent, FreqType, SumType or Random (repeatable)")
        ->delimiter(',');
    c_al->add_option("--base", al.bases, "Joint or Trad (repeatable)")->delimiter(',');
    c_al->add_option("--budgets", al.budgets, "Checkpoints in labelled tokens, e.g. 10,30,100")->delimiter(',');
    c_al->add_option("--seeds", al.seeds, "Number of seeds, counting up from --seed");

    EvalArgs ev;
    auto *c_eval = app.add_subcommand("eval", "Token accuracy and a per-tag confusion summary");
    add_common(c_eval, ev.common, false);
    c_eval->add_option("--model", ev.model, "Tagger")->required();
    c_eval->add_option("--corpus", ev.corpus, "Annotated CoNLL corpus")->required();
    c_eval->add_option("--embeddings", ev.embeddings, "Embeddings the tagger was trained in")->required();
    c_eval->add_option("--mapping", ev.mapping, "Fine-to-universal tag mapping");
    c_eval->add_option("--head", ev.head, "auto, gold or distant")->check(CLI::IsMember({"auto", "gold", "distant"}));

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kInputError;
    }

    try {
        if (c_align->parsed()) return cmd_align(align, out, err);
        if (c_src->parsed()) return cmd_train_source(src, out, err);
        if (c_dist->parsed()) return cmd_distant_tag(dist, out, err);
        if (c_joint->parsed()) return cmd_train_joint(joint, out, err);
        if (c_al->parsed()) return cmd_active(al, out, err);
        if (c_eval->parsed()) return cmd_eval(ev, out, err);
    } catch (const DivergenceError &e) {
        err << "error: " << e.what() << '\n';
        return kDiverged;
    } catch (const Error &e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const std::exception &e) {
        err << "internal error: " << e.what() << '\n';
        return kInternalError;
    }
    return kInputError;
}

}  // namespace xltag::cli

#include "pipeline.hpp"

#include <fstream>
#include <sstream>
#include <unistd.h>

#include "cli.hpp"
#include "synthetic.hpp"
#include "xltag/corpus.hpp"
#include "xltag/embed.hpp"

namespace xltag::testing {

namespace fs = std::filesystem;

namespace {

template <typename Body>
void write_file(const fs::path &p, Body &&body) {
    std::ofstream out(p, std::ios::binary);
    body(out);
}

}  // namespace

PipelineInputs write_pipeline_inputs(const fs::path &dir, std::uint64_t seed) {
    fs::create_directories(dir);
    PipelineInputs in;
    in.dir = dir;
    in.source_vec = dir / "source.vec";
    in.target_vec = dir / "target.vec";
    in.lexicon = dir / "lexicon.tsv";
    in.source_conll = dir / "source.conll";
    in.target_text = dir / "target.txt";
    in.target_gold = dir / "target_gold.conll";
    in.target_test = dir / "target_test.conll";
    in.pool = dir / "pool.conll";
    in.config = dir / "run.cfg";

    LanguageOptions opts;
    opts.dim = 8;
    opts.max_length = 10;
    const SyntheticLanguage lang(opts, seed);
    Rng rng(seed * 7 + 1);
    const EmbeddingSpace &src = lang.embeddings();
    const EmbeddingSpace tgt = encipher(src, random_orthogonal(src.dim(), rng), "target");

    write_file(in.source_vec, [&](std::ostream &o) { write_embeddings(o, src.vocab, src.matrix); });
    write_file(in.target_vec, [&](std::ostream &o) { write_embeddings(o, tgt.vocab, tgt.matrix); });
    write_file(in.lexicon, [&](std::ostream &o) {
        for (const auto &[s, t] : cipher_lexicon(src.vocab).pairs) o << s << '\t' << t << '\n';
    });
    write_file(in.source_conll, [&](std::ostream &o) { write_conll(o, lang.corpus(120, rng)); });
    write_file(in.target_text, [&](std::ostream &o) {
        for (const auto &s : encipher(lang.corpus(150, rng)).sentences) {
            for (std::size_t i = 0; i < s.size(); ++i) o << (i ? " " : "") << s.tokens[i];
            o << '\n';
        }
    });
    write_file(in.target_gold, [&](std::ostream &o) { write_conll(o, encipher(lang.corpus(45, rng))); });
    write_file(in.target_test, [&](std::ostream &o) { write_conll(o, encipher(lang.corpus(80, rng))); });
    write_file(in.pool, [&](std::ostream &o) { write_conll(o, encipher(lang.corpus(30, rng))); });
    write_file(in.config, [](std::ostream &o) {
        o << "# small and fast\nhidden=6\nmlp_hidden=6\nmax_epochs=30\npatience=5\nlearning_rate=0.01\n";
    });
    return in;
}

CommandResult run_command(const std::vector<std::string> &args) {
    std::ostringstream out, err;
    CommandResult r;
    r.status = cli::run(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

PipelineRun run_pipeline(const PipelineInputs &in, const fs::path &out_dir, std::uint64_t seed) {
    PipelineRun run;
    run.out_dir = out_dir;
    const std::string s = std::to_string(seed);
    const std::string cfg = in.config.string();
    auto sub = [&](const char *name) { return (out_dir / name).string(); };
    auto step = [&](std::vector<std::string> args) {
        args.insert(args.end(), {"--seed", s, "--config", cfg});
        run.steps.push_back(run_command(args));
        return run.steps.back().status == 0;
    };
    run.ok = step({"align", "--src-emb", in.source_vec.string(), "--tgt-emb", in.target_vec.string(), "--lexicon",
                   in.lexicon.string(), "--out-dir", sub("align")}) &&
             step({"train-source", "--train", in.source_conll.string(), "--embeddings", sub("align") + "/src.vec",
                   "--out-dir", sub("source")}) &&
             step({"distant-tag", "--model", sub("source") + "/source.model", "--corpus", in.target_text.string(),
                   "--embeddings", sub("align") + "/tgt.vec", "--out-dir", sub("distant")}) &&
             step({"train-joint", "--gold", in.target_gold.string(), "--distant", sub("distant") + "/distant.conll",
                   "--embeddings", sub("align") + "/tgt.vec", "--out-dir", sub("joint")}) &&
             step({"eval", "--model", sub("joint") + "/joint.model", "--corpus", in.target_test.string(),
                   "--embeddings", sub("align") + "/tgt.vec", "--out-dir", sub("eval")}) &&
             step({"active-learn", "--pool", in.pool.string(), "--distant", sub("distant") + "/distant.conll",
                   "--dev", in.target_gold.string(), "--test", in.target_test.string(), "--embeddings",
                   sub("align") + "/tgt.vec", "--strategy", "SumType,Random", "--base", "Joint",
                   "--budgets", "10,30", "--out-dir", sub("active")});
    return run;
}

std::map<std::string, std::string> snapshot(const fs::path &dir) {
    std::map<std::string, std::string> files;
    for (const auto &entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::ifstream in(entry.path(), std::ios::binary);
        std::ostringstream bytes;
        bytes << in.rdbuf();
        files[fs::relative(entry.path(), dir).string()] = bytes.str();
    }
    return files;
}

fs::path temp_dir(const std::string &name) {
    const fs::path p = fs::temp_directory_path() / ("xltag-" + name + "-" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace xltag::testing

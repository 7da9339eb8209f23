#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "xltag/autodiff.hpp"
#include "xltag/corpus.hpp"
#include "xltag/embed.hpp"
#include "xltag/tagger.hpp"

namespace xltag {

/// Global gradient-norm ceiling applied before every update.
inline constexpr double kClipNorm = 5.0;

struct TrainConfig {
    double learning_rate = 0.01;
    double momentum = 0.9;
    int max_epochs = 200;
    int patience = 5;
    std::uint64_t seed = 1;
    std::optional<double> gamma_override;
    /// Per-epoch log destination; empty disables the file.
    std::string log_path;

    /// Throws InputError when a field is out of range.
    void validate() const;
};

/// Flat "key=value" lines with keys named exactly as the TrainConfig fields.
/// Keys absent from the text keep the values already in `base`.
TrainConfig parse_train_config(std::istream &in, TrainConfig base = {});
TrainConfig load_train_config_file(const std::string &path, TrainConfig base = {});
void write_train_config(std::ostream &out, const TrainConfig &cfg);

/// Distant sentences are scored by the distant head, gold sentences by the gold
/// head. Either side may be empty when its term is disabled; kNoTag positions
/// in gold sentences are skipped.
struct JointBatch {
    TaggedCorpus distant;
    TaggedCorpus gold;
};

/// |M| / |N| for gold token count m and distant token count n.
double gamma(std::size_t gold_tokens, std::size_t distant_tokens);

/// gamma * sum_N CE(y_t, o_t) + sum_M CE(y~_t, o~_t) as one graph.
ad::Expr joint_loss(ad::Graph &g, Tagger &model, const EmbeddingSpace &space, const JointBatch &batch, double gamma);

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;
    double dev_accuracy = 0.0;  // fraction in [0, 1]
    double gamma = 0.0;
    std::size_t clipped_steps = 0;
    std::size_t clamp_events = 0;
};

struct TrainLog {
    std::vector<EpochRecord> epochs;
    int best_epoch = 0;
    double best_dev_accuracy = 0.0;
};

/// One tab-separated line per epoch: epoch, loss, dev accuracy, gamma, clipped steps.
void write_train_log(std::ostream &out, const TrainLog &log);
std::string format_epoch(const EpochRecord &r);

struct TrainResult {
    Tagger model;
    TrainLog log;
};

/// Per-sentence SGD with momentum and early stopping on dev token accuracy.
/// Returns the best-dev snapshot. The gold head is marked trained when the
/// batch carries gold labels.
TrainResult train(const Tagger &init, const JointBatch &data, const TaggedCorpus &dev, const EmbeddingSpace &space,
                  const TrainConfig &cfg);

struct Evaluation {
    std::size_t correct = 0;
    std::size_t total = 0;
    /// confusion[gold][predicted]
    std::vector<std::vector<std::size_t>> confusion;

    /// Percentage; 0 for an empty corpus.
    double accuracy() const { return total ? 100.0 * static_cast<double>(correct) / static_cast<double>(total) : 0.0; }
};

/// Token accuracy over the labelled positions of `corpus`.
Evaluation evaluate(const Tagger &model, const EmbeddingSpace &space, const TaggedCorpus &corpus, Head head);

struct DistantResult {
    TaggedCorpus corpus;  // provenance distant
    std::vector<std::size_t> tag_counts;
};

/// Tags every token with the source model's distant-head argmax. The target
/// embeddings must live in the space the model was trained in.
DistantResult generate_distant_data(const Tagger &source_model, const TaggedCorpus &target_corpus,
                                    const EmbeddingSpace &target_space);

}  // namespace xltag

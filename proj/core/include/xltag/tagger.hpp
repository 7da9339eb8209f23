#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "xltag/autodiff.hpp"
#include "xltag/corpus.hpp"
#include "xltag/embed.hpp"
#include "xltag/tensor.hpp"

namespace xltag {

/// Gold head form: tanh MLP over the distant distribution, or the single
/// linear map used by debiasing baselines.
enum class HeadVariant { mlp, linear };

/// Which output distribution to read.
enum class Head { distant, gold };

std::string_view head_variant_name(HeadVariant v);
HeadVariant parse_head_variant(std::string_view name);

struct TaggerShape {
    std::size_t input_dim = 0;
    std::size_t hidden = 128;     // LSTM units per direction
    std::size_t mlp_hidden = 32;  // gold-head hidden layer
    HeadVariant variant = HeadVariant::mlp;
};

/// One LSTM direction. Gate rows are stacked as input, forget, output,
/// candidate; columns cover [x ; h_prev].
struct LstmParams {
    ad::Parameter weights;  // 4H x (d + H)
    ad::Parameter bias;     // 4H
};

struct TaggerParams {
    LstmParams fwd;
    LstmParams bwd;
    ad::Parameter out_w;   // K x 2H
    ad::Parameter out_b;   // K
    ad::Parameter mlp_w1;  // R x K (empty for the linear variant)
    ad::Parameter mlp_b1;  // R
    ad::Parameter mlp_w2;  // K x R, or K x K for the linear variant
    ad::Parameter mlp_b2;  // K

    /// Every array in serialization order.
    std::vector<ad::Parameter *> all();
    std::vector<const ad::Parameter *> all() const;
};

/// Tagger weights bound into one graph, either as trainable parameters or as
/// frozen constants.
struct BoundTagger {
    ad::Expr fwd_w, fwd_b, bwd_w, bwd_b;
    ad::Expr out_w, out_b;
    ad::Expr mlp_w1, mlp_b1, mlp_w2, mlp_b2;
    ad::Expr zero_state;
};

/// BiLSTM encoder over fixed embeddings with a softmax head for distant labels
/// and a second head, fed by the first head's probabilities, for gold labels.
class Tagger {
public:
    Tagger() = default;
    /// Parameters drawn uniformly from (-0.1, 0.1) with the given seed.
    Tagger(TaggerShape shape, TagSet tagset, std::string space_id, std::uint64_t seed);

    const TaggerShape &shape() const { return shape_; }
    const TagSet &tagset() const { return tagset_; }
    std::size_t num_tags() const { return tagset_.size(); }
    const std::string &space_id() const { return space_id_; }

    TaggerParams &params() { return params_; }
    const TaggerParams &params() const { return params_; }
    void fill_parameters(double value);

    /// Set once the gold head has seen labelled data.
    bool gold_trained() const { return gold_trained_; }
    void set_gold_trained(bool v) { gold_trained_ = v; }
    /// Gold head when trained, otherwise the distant head.
    Head evaluation_head() const { return gold_trained_ ? Head::gold : Head::distant; }

    BoundTagger bind(ad::Graph &g);
    BoundTagger bind_frozen(ad::Graph &g) const;

    /// Embedding rows of the tokens as graph leaves.
    std::vector<ad::Expr> embed(ad::Graph &g, const EmbeddingSpace &space,
                                std::span<const std::string> tokens) const;
    /// Same, from precomputed vocabulary indices.
    std::vector<ad::Expr> embed(ad::Graph &g, const EmbeddingSpace &space,
                                std::span<const std::size_t> indices) const;

    /// h_t = [forward state ; backward state] for every position.
    std::vector<ad::Expr> encode(ad::Graph &g, const BoundTagger &w, std::span<const ad::Expr> inputs) const;
    /// softmax(W h + b)
    ad::Expr distant_head(ad::Graph &g, const BoundTagger &w, ad::Expr h) const;
    /// MLP (or linear map) over the distant probabilities, then softmax.
    ad::Expr gold_head(ad::Graph &g, const BoundTagger &w, ad::Expr o) const;

    /// Per-token distribution of `head`.
    std::vector<Tensor> probabilities(const EmbeddingSpace &space, std::span<const std::string> tokens,
                                      Head head) const;
    std::vector<Tensor> probabilities(const EmbeddingSpace &space, std::span<const std::size_t> indices,
                                      Head head) const;
    /// Per-token argmax, ties to the lowest tag index.
    std::vector<int> predict(const EmbeddingSpace &space, std::span<const std::string> tokens, Head head) const;

    /// Versioned text format; reload is bit-exact.
    void save(std::ostream &out) const;
    static Tagger load(std::istream &in);
    void save_file(const std::string &path) const;
    static Tagger load_file(const std::string &path);

    friend bool operator==(const Tagger &a, const Tagger &b);

private:
    void check_space(const EmbeddingSpace &space) const;
    void check_head(Head head) const;

    TaggerShape shape_;
    TagSet tagset_;
    std::string space_id_;
    bool gold_trained_ = false;
    TaggerParams params_;
};

/// Lowest index of the maximum.
int argmax(std::span<const double> values);

}  // namespace xltag

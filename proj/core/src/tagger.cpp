#include "xltag/tagger.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "xltag/error.hpp"
#include "xltag/rng.hpp"
#include "text_util.hpp"

namespace xltag {

namespace {

constexpr std::string_view kMagic = "xltag-model";
constexpr int kFormatVersion = 1;

ad::Parameter make_param(std::string name, std::size_t rows, std::size_t cols) {
    return ad::Parameter(std::move(name), Tensor::matrix(rows, cols));
}

ad::Parameter make_param(std::string name, std::size_t n) {
    return ad::Parameter(std::move(name), Tensor::vector(n));
}

}  // namespace

std::string_view head_variant_name(HeadVariant v) { return v == HeadVariant::mlp ? "mlp" : "linear"; }

HeadVariant parse_head_variant(std::string_view name) {
    if (name == "mlp") return HeadVariant::mlp;
    if (name == "linear") return HeadVariant::linear;
    throw InputError("unknown head variant '" + std::string(name) + "' (expected mlp or linear)");
}

std::vector<ad::Parameter *> TaggerParams::all() {
    return {&fwd.weights, &fwd.bias, &bwd.weights, &bwd.bias, &out_w, &out_b, &mlp_w1, &mlp_b1, &mlp_w2, &mlp_b2};
}

std::vector<const ad::Parameter *> TaggerParams::all() const {
    return {&fwd.weights, &fwd.bias, &bwd.weights, &bwd.bias, &out_w, &out_b, &mlp_w1, &mlp_b1, &mlp_w2, &mlp_b2};
}

int argmax(std::span<const double> values) {
    int best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
    }
    return best;
}

Tagger::Tagger(TaggerShape shape, TagSet tagset, std::string space_id, std::uint64_t seed)
    : shape_(shape), tagset_(std::move(tagset)), space_id_(std::move(space_id)) {
    if (shape_.input_dim == 0 || shape_.hidden == 0) throw InputError("tagger: input and hidden sizes must be positive");
    if (tagset_.size() < 2) throw InputError("tagger: need at least 2 tags");
    if (shape_.variant == HeadVariant::mlp && shape_.mlp_hidden == 0) {
        throw InputError("tagger: mlp gold head needs a positive hidden size");
    }
    const std::size_t d = shape_.input_dim;
    const std::size_t h = shape_.hidden;
    const std::size_t k = tagset_.size();
    const std::size_t r = shape_.mlp_hidden;
    params_.fwd = {make_param("lstm_fwd.weights", 4 * h, d + h), make_param("lstm_fwd.bias", 4 * h)};
    params_.bwd = {make_param("lstm_bwd.weights", 4 * h, d + h), make_param("lstm_bwd.bias", 4 * h)};
    params_.out_w = make_param("distant.W", k, 2 * h);
    params_.out_b = make_param("distant.b", k);
    if (shape_.variant == HeadVariant::mlp) {
        params_.mlp_w1 = make_param("gold.W1", r, k);
        params_.mlp_b1 = make_param("gold.b1", r);
        params_.mlp_w2 = make_param("gold.W2", k, r);
    } else {
        params_.mlp_w1 = make_param("gold.W1", 0, 0);
        params_.mlp_b1 = make_param("gold.b1", 0);
        params_.mlp_w2 = make_param("gold.W2", k, k);
    }
    params_.mlp_b2 = make_param("gold.b2", k);

    Rng rng(seed);
    for (ad::Parameter *p : params_.all()) {
        for (double &v : p->value.data()) v = rng.uniform(-0.1, 0.1);
    }
}

void Tagger::fill_parameters(double value) {
    for (ad::Parameter *p : params_.all()) p->value.fill(value);
}

BoundTagger Tagger::bind(ad::Graph &g) {
    BoundTagger b;
    b.fwd_w = g.param(params_.fwd.weights);
    b.fwd_b = g.param(params_.fwd.bias);
    b.bwd_w = g.param(params_.bwd.weights);
    b.bwd_b = g.param(params_.bwd.bias);
    b.out_w = g.param(params_.out_w);
    b.out_b = g.param(params_.out_b);
    if (shape_.variant == HeadVariant::mlp) {
        b.mlp_w1 = g.param(params_.mlp_w1);
        b.mlp_b1 = g.param(params_.mlp_b1);
    }
    b.mlp_w2 = g.param(params_.mlp_w2);
    b.mlp_b2 = g.param(params_.mlp_b2);
    b.zero_state = g.input(Tensor::vector(shape_.hidden));
    return b;
}

BoundTagger Tagger::bind_frozen(ad::Graph &g) const {
    BoundTagger b;
    b.fwd_w = g.constant(params_.fwd.weights.value);
    b.fwd_b = g.constant(params_.fwd.bias.value);
    b.bwd_w = g.constant(params_.bwd.weights.value);
    b.bwd_b = g.constant(params_.bwd.bias.value);
    b.out_w = g.constant(params_.out_w.value);
    b.out_b = g.constant(params_.out_b.value);
    if (shape_.variant == HeadVariant::mlp) {
        b.mlp_w1 = g.constant(params_.mlp_w1.value);
        b.mlp_b1 = g.constant(params_.mlp_b1.value);
    }
    b.mlp_w2 = g.constant(params_.mlp_w2.value);
    b.mlp_b2 = g.constant(params_.mlp_b2.value);
    b.zero_state = g.input(Tensor::vector(shape_.hidden));
    return b;
}

void Tagger::check_space(const EmbeddingSpace &space) const {
    if (space.dim() != shape_.input_dim) {
        throw InputError("tagger: embeddings have dimension " + std::to_string(space.dim()) + ", model expects " +
                         std::to_string(shape_.input_dim));
    }
}

void Tagger::check_head(Head head) const {
    if (head == Head::gold && !gold_trained_) {
        throw InputError("tagger: gold head requested, but this model was trained with distant data only");
    }
}

std::vector<ad::Expr> Tagger::embed(ad::Graph &g, const EmbeddingSpace &space,
                                    std::span<const std::string> tokens) const {
    std::vector<std::size_t> idx;
    idx.reserve(tokens.size());
    for (const auto &t : tokens) idx.push_back(space.index(t));
    return embed(g, space, idx);
}

std::vector<ad::Expr> Tagger::embed(ad::Graph &g, const EmbeddingSpace &space,
                                    std::span<const std::size_t> indices) const {
    check_space(space);
    const ad::Expr table = g.constant(space.matrix.table());
    std::vector<ad::Expr> xs;
    xs.reserve(indices.size());
    for (std::size_t i : indices) xs.push_back(g.lookup_row(table, i));
    return xs;
}

std::vector<ad::Expr> Tagger::encode(ad::Graph &g, const BoundTagger &w, std::span<const ad::Expr> inputs) const {
    const std::size_t n = inputs.size();
    if (n == 0) throw InputError("encode: empty sentence");
    const std::size_t h = shape_.hidden;

    auto run = [&](ad::Expr weights, ad::Expr bias, bool reverse) {
        std::vector<ad::Expr> states(n);
        ad::Expr hidden = w.zero_state;
        ad::Expr cell = w.zero_state;
        for (std::size_t step = 0; step < n; ++step) {
            const std::size_t t = reverse ? n - 1 - step : step;
            const ad::Expr z = g.add(g.matmul(weights, g.concat(inputs[t], hidden)), bias);
            const ad::Expr in_gate = g.sigmoid(g.slice(z, 0, h));
            const ad::Expr forget = g.sigmoid(g.slice(z, h, h));
            const ad::Expr out_gate = g.sigmoid(g.slice(z, 2 * h, h));
            const ad::Expr candidate = g.tanh(g.slice(z, 3 * h, h));
            const ad::Expr fresh = g.mul(in_gate, candidate);
            cell = step == 0 ? fresh : g.add(g.mul(forget, cell), fresh);
            hidden = g.mul(out_gate, g.tanh(cell));
            states[t] = hidden;
        }
        return states;
    };
    const auto fwd = run(w.fwd_w, w.fwd_b, false);
    const auto bwd = run(w.bwd_w, w.bwd_b, true);
    std::vector<ad::Expr> out(n);
    for (std::size_t t = 0; t < n; ++t) out[t] = g.concat(fwd[t], bwd[t]);
    return out;
}

ad::Expr Tagger::distant_head(ad::Graph &g, const BoundTagger &w, ad::Expr h) const {
    return g.softmax(g.add(g.matmul(w.out_w, h), w.out_b));
}

ad::Expr Tagger::gold_head(ad::Graph &g, const BoundTagger &w, ad::Expr o) const {
    ad::Expr features = o;
    if (shape_.variant == HeadVariant::mlp) features = g.tanh(g.add(g.matmul(w.mlp_w1, o), w.mlp_b1));
    return g.softmax(g.add(g.matmul(w.mlp_w2, features), w.mlp_b2));
}

std::vector<Tensor> Tagger::probabilities(const EmbeddingSpace &space, std::span<const std::string> tokens,
                                          Head head) const {
    std::vector<std::size_t> idx;
    idx.reserve(tokens.size());
    for (const auto &t : tokens) idx.push_back(space.index(t));
    return probabilities(space, idx, head);
}

std::vector<Tensor> Tagger::probabilities(const EmbeddingSpace &space, std::span<const std::size_t> indices,
                                          Head head) const {
    check_head(head);
    ad::Graph g;
    const BoundTagger w = bind_frozen(g);
    const auto xs = embed(g, space, indices);
    const auto hs = encode(g, w, xs);
    std::vector<Tensor> out;
    out.reserve(hs.size());
    for (ad::Expr h : hs) {
        ad::Expr o = distant_head(g, w, h);
        if (head == Head::gold) o = gold_head(g, w, o);
        out.push_back(g.value(o));
    }
    return out;
}

std::vector<int> Tagger::predict(const EmbeddingSpace &space, std::span<const std::string> tokens,
                                 Head head) const {
    std::vector<int> tags;
    for (const Tensor &p : probabilities(space, tokens, head)) tags.push_back(argmax(p.data()));
    return tags;
}

void Tagger::save(std::ostream &out) const {
    out << kMagic << ' ' << kFormatVersion << '\n';
    out << "input_dim " << shape_.input_dim << '\n';
    out << "hidden " << shape_.hidden << '\n';
    out << "mlp_hidden " << shape_.mlp_hidden << '\n';
    out << "head " << head_variant_name(shape_.variant) << '\n';
    out << "gold_trained " << (gold_trained_ ? 1 : 0) << '\n';
    out << "space " << space_id_ << '\n';
    out << "tags " << tagset_.size() << '\n';
    for (const auto &t : tagset_.tags()) out << "tag " << t << '\n';
    for (const ad::Parameter *p : params_.all()) {
        const Tensor &v = p->value;
        out << "param " << p->name << ' ' << v.rank() << ' ' << v.rows() << ' ' << v.cols() << '\n';
        for (std::size_t r = 0; r < v.rows(); ++r) {
            if (v.cols() == 0) continue;
            for (std::size_t c = 0; c < v.cols(); ++c) {
                if (c) out << ' ';
                out << format_double(v.data()[r * v.cols() + c]);
            }
            out << '\n';
        }
    }
    out << "end\n";
}

Tagger Tagger::load(std::istream &in) {
    std::string line;
    std::size_t line_no = 0;
    auto next = [&]() -> std::string & {
        if (!std::getline(in, line)) throw InputError("model: unexpected end of file after line " + std::to_string(line_no));
        ++line_no;
        return line;
    };
    auto fail = [&](const std::string &why) -> InputError {
        return InputError("model: line " + std::to_string(line_no) + ": " + why);
    };
    auto keyed = [&](std::string_view key) -> std::string {
        std::string &l = next();
        if (l.rfind(std::string(key) + " ", 0) != 0 && l != key) throw fail("expected '" + std::string(key) + "'");
        return l.size() > key.size() ? l.substr(key.size() + 1) : std::string();
    };
    auto keyed_size = [&](std::string_view key) {
        std::size_t v = 0;
        if (!detail::parse_size(keyed(key), v)) throw fail("bad value for '" + std::string(key) + "'");
        return v;
    };

    {
        auto fields = detail::split_ws(next());
        std::size_t version = 0;
        if (fields.size() != 2 || fields[0] != kMagic || !detail::parse_size(fields[1], version)) {
            throw fail("not an xltag model file");
        }
        if (version != kFormatVersion) throw fail("unsupported model version " + std::to_string(version));
    }
    Tagger t;
    t.shape_.input_dim = keyed_size("input_dim");
    t.shape_.hidden = keyed_size("hidden");
    t.shape_.mlp_hidden = keyed_size("mlp_hidden");
    t.shape_.variant = parse_head_variant(keyed("head"));
    t.gold_trained_ = keyed_size("gold_trained") != 0;
    t.space_id_ = keyed("space");
    const std::size_t k = keyed_size("tags");
    std::vector<std::string> tags;
    for (std::size_t i = 0; i < k; ++i) tags.push_back(keyed("tag"));
    t.tagset_ = TagSet(std::move(tags));

    // Build the expected layout, then fill it.
    Tagger shape_ref(t.shape_, t.tagset_, t.space_id_, 0);
    t.params_ = std::move(shape_ref.params_);
    for (ad::Parameter *p : t.params_.all()) {
        auto fields = detail::split_ws(next());
        std::size_t rank = 0, rows = 0, cols = 0;
        if (fields.size() != 5 || fields[0] != "param" || fields[1] != p->name || !detail::parse_size(fields[2], rank) ||
            !detail::parse_size(fields[3], rows) || !detail::parse_size(fields[4], cols)) {
            throw fail("expected header for parameter " + p->name);
        }
        if (rank != p->value.rank() || rows != p->value.rows() || cols != p->value.cols()) {
            throw fail("parameter " + p->name + " has shape " + std::to_string(rows) + "x" + std::to_string(cols) +
                       ", expected " + p->value.shape_string());
        }
        for (std::size_t r = 0; r < rows && cols > 0; ++r) {
            auto values = detail::split_ws(next());
            if (values.size() != cols) throw fail("expected " + std::to_string(cols) + " values");
            for (std::size_t c = 0; c < cols; ++c) {
                double v = 0.0;
                if (!detail::parse_double(values[c], v)) throw fail("bad number '" + std::string(values[c]) + "'");
                p->value.data()[r * cols + c] = v;
            }
        }
        p->grad = p->value.zeros_like();
    }
    if (next() != "end") throw fail("expected 'end'");
    return t;
}

void Tagger::save_file(const std::string &path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write model file: " + path);
    save(out);
    if (!out) throw InputError("failed writing model file: " + path);
}

Tagger Tagger::load_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open model file: " + path);
    return load(in);
}

bool operator==(const Tagger &a, const Tagger &b) {
    if (a.shape_.input_dim != b.shape_.input_dim || a.shape_.hidden != b.shape_.hidden ||
        a.shape_.mlp_hidden != b.shape_.mlp_hidden || a.shape_.variant != b.shape_.variant ||
        !(a.tagset_ == b.tagset_) || a.space_id_ != b.space_id_ || a.gold_trained_ != b.gold_trained_) {
        return false;
    }
    const auto pa = a.params_.all();
    const auto pb = b.params_.all();
    for (std::size_t i = 0; i < pa.size(); ++i) {
        if (!(pa[i]->value == pb[i]->value)) return false;
    }
    return true;
}

}  // namespace xltag

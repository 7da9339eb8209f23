#include "xltag/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "xltag/error.hpp"

namespace xltag::ad {

namespace {

[[noreturn]] void shape_mismatch(Op op, const Tensor &a, const Tensor &b) {
    throw ShapeError(std::string(op_name(op)) + ": shape mismatch " + a.shape_string() + " vs " +
                     b.shape_string());
}

}  // namespace

std::string_view op_name(Op op) {
    switch (op) {
        case Op::Input: return "input";
        case Op::Constant: return "constant";
        case Op::Variable: return "variable";
        case Op::Parameter: return "parameter";
        case Op::MatMul: return "matmul";
        case Op::Add: return "add";
        case Op::Mul: return "mul";
        case Op::Concat: return "concat";
        case Op::Tanh: return "tanh";
        case Op::Sigmoid: return "sigmoid";
        case Op::Softmax: return "softmax";
        case Op::LookupRow: return "lookup_row";
        case Op::Slice: return "slice";
        case Op::Sum: return "sum";
        case Op::Scale: return "scale";
        case Op::CrossEntropy: return "cross_entropy";
    }
    return "unknown";
}

Expr Graph::push(Node n) {
    if (nodes_.size() >= kNone) throw Error("graph: node limit reached");
    nodes_.push_back(std::move(n));
    return Expr{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

const Graph::Node &Graph::node(Expr e) const {
    if (e.id >= nodes_.size()) throw InputError("graph: expression does not belong to this graph");
    return nodes_[e.id];
}

const Tensor &Graph::value(Expr e) const { return node(e).value(); }

const Tensor &Graph::grad(Expr e) const { return node(e).grad; }

void Graph::clear() {
    nodes_.clear();
    clamp_events_ = 0;
}

Expr Graph::input(Tensor value) {
    Node n;
    n.op = Op::Input;
    n.own = std::move(value);
    return push(std::move(n));
}

Expr Graph::constant(const Tensor &value) {
    Node n;
    n.op = Op::Constant;
    n.borrowed = &value;
    return push(std::move(n));
}

Expr Graph::variable(Tensor value) {
    Node n;
    n.op = Op::Variable;
    n.own = std::move(value);
    n.needs_grad = true;
    return push(std::move(n));
}

Expr Graph::param(Parameter &p) {
    Node n;
    n.op = Op::Parameter;
    n.borrowed = &p.value;
    n.param = &p;
    n.needs_grad = true;
    return push(std::move(n));
}

Expr Graph::apply(Op op, std::span<const Expr> inputs) {
    auto arity = [&](std::size_t k) {
        if (inputs.size() != k) {
            throw ShapeError(std::string(op_name(op)) + ": expected " + std::to_string(k) +
                             " inputs, got " + std::to_string(inputs.size()));
        }
    };
    switch (op) {
        case Op::MatMul: arity(2); return matmul(inputs[0], inputs[1]);
        case Op::Add: arity(2); return add(inputs[0], inputs[1]);
        case Op::Mul: arity(2); return mul(inputs[0], inputs[1]);
        case Op::Concat: return concat(inputs);
        case Op::Tanh: arity(1); return tanh(inputs[0]);
        case Op::Sigmoid: arity(1); return sigmoid(inputs[0]);
        case Op::Softmax: arity(1); return softmax(inputs[0]);
        case Op::Sum: arity(1); return sum(inputs[0]);
        default:
            throw InputError(std::string(op_name(op)) +
                             ": needs attributes; use the dedicated Graph method");
    }
}

Expr Graph::matmul(Expr ea, Expr eb) {
    const Node &na = node(ea);
    const Node &nb = node(eb);
    const Tensor &a = na.value();
    const Tensor &b = nb.value();
    if (a.rank() != 2 || a.cols() != b.rows()) shape_mismatch(Op::MatMul, a, b);

    Node n;
    n.op = Op::MatMul;
    n.a = ea.id;
    n.b = eb.id;
    n.needs_grad = na.needs_grad || nb.needs_grad;
    const std::size_t m = a.rows();
    const std::size_t k = a.cols();
    if (b.rank() == 1) {
        n.own = Tensor::vector(m);
        const double *x = b.data().data();
        for (std::size_t i = 0; i < m; ++i) {
            const double *ai = a.data().data() + i * k;
            double acc = 0.0;
            for (std::size_t j = 0; j < k; ++j) acc += ai[j] * x[j];
            n.own[i] = acc;
        }
    } else {
        const std::size_t cols = b.cols();
        n.own = Tensor::matrix(m, cols);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < k; ++j) {
                const double aij = a.at(i, j);
                for (std::size_t c = 0; c < cols; ++c) n.own.at(i, c) += aij * b.at(j, c);
            }
        }
    }
    return push(std::move(n));
}

Expr Graph::add(Expr ea, Expr eb) {
    const Node &na = node(ea);
    const Node &nb = node(eb);
    const Tensor &a = na.value();
    const Tensor &b = nb.value();
    if (!a.same_shape(b)) shape_mismatch(Op::Add, a, b);
    Node n;
    n.op = Op::Add;
    n.a = ea.id;
    n.b = eb.id;
    n.needs_grad = na.needs_grad || nb.needs_grad;
    n.own = a;
    for (std::size_t i = 0; i < n.own.size(); ++i) n.own[i] += b[i];
    return push(std::move(n));
}

Expr Graph::mul(Expr ea, Expr eb) {
    const Node &na = node(ea);
    const Node &nb = node(eb);
    const Tensor &a = na.value();
    const Tensor &b = nb.value();
    if (!a.same_shape(b)) shape_mismatch(Op::Mul, a, b);
    Node n;
    n.op = Op::Mul;
    n.a = ea.id;
    n.b = eb.id;
    n.needs_grad = na.needs_grad || nb.needs_grad;
    n.own = a;
    for (std::size_t i = 0; i < n.own.size(); ++i) n.own[i] *= b[i];
    return push(std::move(n));
}

Expr Graph::concat(Expr a, Expr b) {
    const Expr parts[] = {a, b};
    return concat(parts);
}

Expr Graph::concat(std::span<const Expr> parts) {
    if (parts.empty()) throw ShapeError("concat: no inputs");
    Node n;
    n.op = Op::Concat;
    std::size_t total = 0;
    for (Expr e : parts) {
        const Node &p = node(e);
        if (p.value().rank() != 1) {
            shape_mismatch(Op::Concat, node(parts[0]).value(), p.value());
        }
        total += p.value().size();
        n.needs_grad = n.needs_grad || p.needs_grad;
        n.parts.push_back(e.id);
    }
    n.own = Tensor::vector(total);
    std::size_t offset = 0;
    for (Expr e : parts) {
        auto src = node(e).value().data();
        std::copy(src.begin(), src.end(), n.own.data().begin() + static_cast<std::ptrdiff_t>(offset));
        offset += src.size();
    }
    return push(std::move(n));
}

Expr Graph::tanh(Expr ex) {
    const Node &nx = node(ex);
    Node n;
    n.op = Op::Tanh;
    n.a = ex.id;
    n.needs_grad = nx.needs_grad;
    n.own = nx.value();
    for (double &v : n.own.data()) v = std::tanh(v);
    return push(std::move(n));
}

Expr Graph::sigmoid(Expr ex) {
    const Node &nx = node(ex);
    Node n;
    n.op = Op::Sigmoid;
    n.a = ex.id;
    n.needs_grad = nx.needs_grad;
    n.own = nx.value();
    for (double &v : n.own.data()) {
        v = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
    }
    return push(std::move(n));
}

Expr Graph::softmax(Expr ex) {
    const Node &nx = node(ex);
    const Tensor &x = nx.value();
    if (x.rank() != 1 || x.size() == 0) {
        throw ShapeError("softmax: expected a non-empty vector, got " + x.shape_string());
    }
    Node n;
    n.op = Op::Softmax;
    n.a = ex.id;
    n.needs_grad = nx.needs_grad;
    n.own = x;
    const double peak = *std::max_element(x.data().begin(), x.data().end());
    double total = 0.0;
    for (double &v : n.own.data()) {
        v = std::exp(v - peak);
        total += v;
    }
    for (double &v : n.own.data()) v /= total;
    return push(std::move(n));
}

Expr Graph::lookup_row(Expr etable, std::size_t row) {
    const Node &nt = node(etable);
    const Tensor &table = nt.value();
    if (table.rank() != 2) {
        throw ShapeError("lookup_row: expected a matrix, got " + table.shape_string());
    }
    if (row >= table.rows()) {
        throw ShapeError("lookup_row: row " + std::to_string(row) + " out of range for " +
                         table.shape_string());
    }
    Node n;
    n.op = Op::LookupRow;
    n.a = etable.id;
    n.attr = row;
    n.needs_grad = nt.needs_grad;
    n.own = Tensor::from(table.row(row));
    return push(std::move(n));
}

Expr Graph::slice(Expr ex, std::size_t begin, std::size_t length) {
    const Node &nx = node(ex);
    const Tensor &x = nx.value();
    if (x.rank() != 1 || length == 0 || begin + length > x.size()) {
        throw ShapeError("slice: [" + std::to_string(begin) + ", " + std::to_string(begin + length) +
                         ") out of range for " + x.shape_string());
    }
    Node n;
    n.op = Op::Slice;
    n.a = ex.id;
    n.attr = begin;
    n.attr2 = length;
    n.needs_grad = nx.needs_grad;
    n.own = Tensor::from(x.data().subspan(begin, length));
    return push(std::move(n));
}

Expr Graph::sum(Expr ex) {
    const Node &nx = node(ex);
    Node n;
    n.op = Op::Sum;
    n.a = ex.id;
    n.needs_grad = nx.needs_grad;
    n.own = Tensor::vector(1);
    double total = 0.0;
    for (double v : nx.value().data()) total += v;
    n.own[0] = total;
    return push(std::move(n));
}

Expr Graph::scale(Expr ex, double factor) {
    const Node &nx = node(ex);
    Node n;
    n.op = Op::Scale;
    n.a = ex.id;
    n.factor = factor;
    n.needs_grad = nx.needs_grad;
    n.own = nx.value();
    for (double &v : n.own.data()) v *= factor;
    return push(std::move(n));
}

Expr Graph::cross_entropy(Expr eprobs, std::size_t target) {
    const Node &np = node(eprobs);
    const Tensor &p = np.value();
    if (p.rank() != 1 || target >= p.size()) {
        throw ShapeError("cross_entropy: target " + std::to_string(target) + " invalid for " +
                         p.shape_string());
    }
    // Non-finite inputs flow through as a NaN loss so that training can
    // report divergence.
    double total = 0.0;
    bool finite = true;
    for (double v : p.data()) {
        if (!std::isfinite(v)) {
            finite = false;
            continue;
        }
        if (v < 0.0) throw InputError("cross_entropy: negative probability");
        total += v;
    }
    if (finite && std::abs(total - 1.0) > 1e-9) {
        throw InputError("cross_entropy: probabilities sum to " + std::to_string(total));
    }
    Node n;
    n.op = Op::CrossEntropy;
    n.a = eprobs.id;
    n.attr = target;
    n.needs_grad = np.needs_grad;
    double pt = finite ? p[target] : std::numeric_limits<double>::quiet_NaN();
    if (pt < kProbabilityFloor) {
        pt = kProbabilityFloor;
        ++clamp_events_;
    }
    n.own = Tensor::vector(1);
    n.own[0] = -std::log(pt);
    return push(std::move(n));
}

Expr Graph::cross_entropy(Expr probs, const Tensor &one_hot) {
    const Tensor &p = value(probs);
    if (!one_hot.same_shape(p)) shape_mismatch(Op::CrossEntropy, p, one_hot);
    std::size_t target = one_hot.size();
    for (std::size_t i = 0; i < one_hot.size(); ++i) {
        if (one_hot[i] == 1.0 && target == one_hot.size()) {
            target = i;
        } else if (one_hot[i] != 0.0) {
            throw InputError("cross_entropy: target is not one-hot");
        }
    }
    if (target == one_hot.size()) throw InputError("cross_entropy: target is not one-hot");
    return cross_entropy(probs, target);
}

Tensor &Graph::grad_slot(std::uint32_t id) {
    Node &n = nodes_[id];
    if (n.grad.empty() || !n.grad.same_shape(n.value())) n.grad = n.value().zeros_like();
    return n.grad;
}

void Graph::backward(Expr root) {
    const Node &r = node(root);
    if (r.value().size() != 1) {
        throw ShapeError("backward: root must be scalar, got " + r.value().shape_string());
    }
    for (Node &n : nodes_) n.grad = Tensor();
    grad_slot(root.id)[0] = 1.0;
    for (std::uint32_t id = root.id + 1; id-- > 0;) {
        Node &n = nodes_[id];
        if (!n.needs_grad || n.grad.empty()) continue;
        backprop(id);
    }
}

void Graph::backprop(std::uint32_t id) {
    // References into nodes_ stay valid: backward never pushes nodes.
    Node &n = nodes_[id];
    const Tensor &g = n.grad;
    switch (n.op) {
        case Op::Input:
        case Op::Constant:
        case Op::Variable:
            return;
        case Op::Parameter: {
            Tensor &pg = n.param->grad;
            if (!pg.same_shape(n.param->value)) pg = n.param->value.zeros_like();
            for (std::size_t i = 0; i < g.size(); ++i) pg[i] += g[i];
            return;
        }
        case Op::MatMul: {
            const Node &na = nodes_[n.a];
            const Node &nb = nodes_[n.b];
            const Tensor &a = na.value();
            const Tensor &b = nb.value();
            const std::size_t m = a.rows();
            const std::size_t k = a.cols();
            if (b.rank() == 1) {
                if (na.needs_grad) {
                    Tensor &ga = grad_slot(n.a);
                    for (std::size_t i = 0; i < m; ++i) {
                        const double gi = g[i];
                        if (gi == 0.0) continue;
                        double *row = ga.data().data() + i * k;
                        for (std::size_t j = 0; j < k; ++j) row[j] += gi * b[j];
                    }
                }
                if (nb.needs_grad) {
                    Tensor &gb = grad_slot(n.b);
                    for (std::size_t i = 0; i < m; ++i) {
                        const double gi = g[i];
                        if (gi == 0.0) continue;
                        const double *row = a.data().data() + i * k;
                        for (std::size_t j = 0; j < k; ++j) gb[j] += gi * row[j];
                    }
                }
            } else {
                const std::size_t cols = b.cols();
                if (na.needs_grad) {
                    Tensor &ga = grad_slot(n.a);
                    for (std::size_t i = 0; i < m; ++i)
                        for (std::size_t j = 0; j < k; ++j) {
                            double acc = 0.0;
                            for (std::size_t c = 0; c < cols; ++c) acc += g.at(i, c) * b.at(j, c);
                            ga.at(i, j) += acc;
                        }
                }
                if (nb.needs_grad) {
                    Tensor &gb = grad_slot(n.b);
                    for (std::size_t i = 0; i < m; ++i)
                        for (std::size_t j = 0; j < k; ++j) {
                            const double aij = a.at(i, j);
                            for (std::size_t c = 0; c < cols; ++c) gb.at(j, c) += aij * g.at(i, c);
                        }
                }
            }
            return;
        }
        case Op::Add: {
            for (std::uint32_t in : {n.a, n.b}) {
                if (!nodes_[in].needs_grad) continue;
                Tensor &gi = grad_slot(in);
                for (std::size_t i = 0; i < g.size(); ++i) gi[i] += g[i];
            }
            return;
        }
        case Op::Mul: {
            const Tensor &a = nodes_[n.a].value();
            const Tensor &b = nodes_[n.b].value();
            if (nodes_[n.a].needs_grad) {
                Tensor &ga = grad_slot(n.a);
                for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * b[i];
            }
            if (nodes_[n.b].needs_grad) {
                Tensor &gb = grad_slot(n.b);
                for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * a[i];
            }
            return;
        }
        case Op::Concat: {
            std::size_t offset = 0;
            for (std::uint32_t in : n.parts) {
                const std::size_t len = nodes_[in].value().size();
                if (nodes_[in].needs_grad) {
                    Tensor &gi = grad_slot(in);
                    for (std::size_t i = 0; i < len; ++i) gi[i] += g[offset + i];
                }
                offset += len;
            }
            return;
        }
        case Op::Tanh: {
            Tensor &gx = grad_slot(n.a);
            const Tensor &y = n.own;
            for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * (1.0 - y[i] * y[i]);
            return;
        }
        case Op::Sigmoid: {
            Tensor &gx = grad_slot(n.a);
            const Tensor &y = n.own;
            for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * y[i] * (1.0 - y[i]);
            return;
        }
        case Op::Softmax: {
            Tensor &gx = grad_slot(n.a);
            const Tensor &y = n.own;
            double dot = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) dot += g[i] * y[i];
            for (std::size_t i = 0; i < g.size(); ++i) gx[i] += y[i] * (g[i] - dot);
            return;
        }
        case Op::LookupRow: {
            Tensor &gt = grad_slot(n.a);
            auto row = gt.row(n.attr);
            for (std::size_t i = 0; i < g.size(); ++i) row[i] += g[i];
            return;
        }
        case Op::Slice: {
            Tensor &gx = grad_slot(n.a);
            for (std::size_t i = 0; i < g.size(); ++i) gx[n.attr + i] += g[i];
            return;
        }
        case Op::Sum: {
            Tensor &gx = grad_slot(n.a);
            for (double &v : gx.data()) v += g[0];
            return;
        }
        case Op::Scale: {
            Tensor &gx = grad_slot(n.a);
            for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * n.factor;
            return;
        }
        case Op::CrossEntropy: {
            const Node &np = nodes_[n.a];
            const Tensor &p = np.value();
            if (np.op == Op::Softmax) {
                // d(-log softmax(z)_t)/dz = softmax(z) - onehot(t)
                const std::uint32_t logits = np.a;
                if (!nodes_[logits].needs_grad) return;
                Tensor &gz = grad_slot(logits);
                for (std::size_t i = 0; i < p.size(); ++i) {
                    gz[i] += g[0] * (p[i] - (i == n.attr ? 1.0 : 0.0));
                }
            } else {
                Tensor &gp = grad_slot(n.a);
                gp[n.attr] += -g[0] / std::max(p[n.attr], kProbabilityFloor);
            }
            return;
        }
    }
}

}  // namespace xltag::ad

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xltag/tensor.hpp"

// Define-by-run reverse-mode differentiation. A Graph records every operation
// applied to it in creation order, which is already a topological order, so
// backward is a single reverse sweep. Graphs are cheap to rebuild and are
// meant to be built per sentence and discarded.
namespace xltag::ad {

enum class Op : std::uint8_t {
    Input,      // owned constant leaf
    Constant,   // borrowed constant leaf
    Variable,   // owned leaf that receives a gradient
    Parameter,  // borrowed leaf whose gradient is accumulated into the Parameter
    MatMul,
    Add,
    Mul,
    Concat,
    Tanh,
    Sigmoid,
    Softmax,
    LookupRow,
    Slice,
    Sum,
    Scale,
    CrossEntropy,
};

std::string_view op_name(Op op);

/// Handle to a node of one Graph.
struct Expr {
    std::uint32_t id = 0;
};

/// Trainable array. The graph borrows it by reference; backward adds into
/// grad, so callers zero grads between updates.
struct Parameter {
    Parameter() = default;
    Parameter(std::string name, Tensor init)
        : name(std::move(name)), value(std::move(init)), grad(value.zeros_like()) {}

    void zero_grad() { grad.fill(0.0); }

    std::string name;
    Tensor value;
    Tensor grad;
};

/// Probability floor used by cross_entropy.
inline constexpr double kProbabilityFloor = 1e-12;

class Graph {
public:
    Graph() { nodes_.reserve(256); }

    Expr input(Tensor value);
    /// Borrowed, gradient-free leaf. `value` must outlive the graph.
    Expr constant(const Tensor &value);
    /// Owned leaf that gets a gradient; used for gradient checks.
    Expr variable(Tensor value);
    /// Borrowed trainable leaf. `p` must outlive the graph.
    Expr param(Parameter &p);

    /// Generic entry for attribute-free operations (MatMul, Add, Mul, Concat,
    /// Tanh, Sigmoid, Softmax, Sum).
    Expr apply(Op op, std::span<const Expr> inputs);

    Expr matmul(Expr a, Expr b);
    Expr add(Expr a, Expr b);
    Expr mul(Expr a, Expr b);
    Expr concat(std::span<const Expr> parts);
    Expr concat(Expr a, Expr b);
    Expr tanh(Expr x);
    Expr sigmoid(Expr x);
    /// Max-subtracted softmax over all elements of a vector.
    Expr softmax(Expr x);
    Expr lookup_row(Expr table, std::size_t row);
    Expr slice(Expr x, std::size_t begin, std::size_t length);
    Expr sum(Expr x);
    Expr scale(Expr x, double factor);

    /// -log(probs[target]). Probabilities below kProbabilityFloor are clamped
    /// and counted in clamp_events(). When `probs` is a softmax node the
    /// gradient is routed straight to the logits as (probs - onehot).
    Expr cross_entropy(Expr probs, std::size_t target);
    /// Same, with the target given as a one-hot tensor.
    Expr cross_entropy(Expr probs, const Tensor &one_hot);

    /// Reverse sweep from a scalar root. Previous node gradients are reset;
    /// parameter gradients accumulate.
    void backward(Expr root);

    const Tensor &value(Expr e) const;
    /// Gradient of the last backward root with respect to `e`. Nodes that were
    /// not reached hold an empty tensor.
    const Tensor &grad(Expr e) const;
    Op op(Expr e) const { return nodes_.at(e.id).op; }

    std::size_t size() const { return nodes_.size(); }
    std::size_t clamp_events() const { return clamp_events_; }
    void clear();

private:
    static constexpr std::uint32_t kNone = UINT32_MAX;

    struct Node {
        Op op = Op::Input;
        std::uint32_t a = kNone;
        std::uint32_t b = kNone;
        std::vector<std::uint32_t> parts;  // Concat operands
        std::size_t attr = 0;
        std::size_t attr2 = 0;
        double factor = 0.0;
        const Tensor *borrowed = nullptr;
        Parameter *param = nullptr;
        bool needs_grad = false;
        Tensor own;
        Tensor grad;

        const Tensor &value() const { return borrowed ? *borrowed : own; }
    };

    Expr push(Node node);
    const Node &node(Expr e) const;
    Tensor &grad_slot(std::uint32_t id);
    void backprop(std::uint32_t id);

    std::vector<Node> nodes_;
    std::size_t clamp_events_ = 0;
};

}  // namespace xltag::ad

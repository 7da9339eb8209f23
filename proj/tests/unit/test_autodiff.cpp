#include <cmath>
#include <limits>
#include <gtest/gtest.h>

#include "gradcheck.hpp"
#include "xltag/autodiff.hpp"
#include "xltag/error.hpp"

namespace xltag {
namespace {

using ad::Expr;
using ad::Graph;
using testing::check_operation;
using testing::gradient_cases;

TEST(Autodiff, TanhOfZero) {
    Graph g;
    const Expr y = g.tanh(g.input(Tensor::from({0.0, 0.0})));
    EXPECT_EQ(g.value(y), Tensor::from({0.0, 0.0}));
}

TEST(Autodiff, MatmulByHand) {
    Graph g;
    const Expr y = g.matmul(g.input(Tensor::from({{1.0, 2.0}})), g.input(Tensor::from(2, 1, std::vector<double>{3.0, 4.0})));
    ASSERT_EQ(g.value(y).shape(), (std::vector<std::size_t>{1, 1}));
    EXPECT_DOUBLE_EQ(g.value(y)[0], 11.0);
}

TEST(Autodiff, MatmulVector) {
    Graph g;
    const Expr y = g.matmul(g.input(Tensor::from({{1.0, 2.0}, {0.5, -1.0}})), g.input(Tensor::from({3.0, 4.0})));
    EXPECT_EQ(g.value(y), Tensor::from({11.0, -2.5}));
}

TEST(Autodiff, SoftmaxUniform) {
    Graph g;
    const Expr y = g.softmax(g.input(Tensor::from({0.0, 0.0, 0.0})));
    for (double v : g.value(y).data()) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
}

TEST(Autodiff, ShapeMismatchNamesOpAndShapes) {
    Graph g;
    const Expr a = g.input(Tensor::matrix(1, 2));
    const Expr b = g.input(Tensor::vector(3));
    try {
        g.matmul(a, b);
        FAIL() << "expected ShapeError";
    } catch (const ShapeError &e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("matmul"), std::string::npos) << msg;
        EXPECT_NE(msg.find("[1x2]"), std::string::npos) << msg;
        EXPECT_NE(msg.find("[3]"), std::string::npos) << msg;
    }
    EXPECT_THROW(g.add(g.input(Tensor::vector(2)), g.input(Tensor::vector(3))), ShapeError);
    EXPECT_THROW(g.mul(g.input(Tensor::vector(2)), g.input(Tensor::matrix(2, 1))), ShapeError);
    EXPECT_THROW(g.slice(g.input(Tensor::vector(2)), 1, 2), ShapeError);
    EXPECT_THROW(g.lookup_row(g.input(Tensor::matrix(2, 2)), 2), ShapeError);
}

TEST(Autodiff, ApplyMatchesNamedOps) {
    Graph g;
    const Expr x = g.input(Tensor::from({0.3, -0.7}));
    const Expr inputs[] = {x};
    EXPECT_EQ(g.value(g.apply(ad::Op::Tanh, inputs)), g.value(g.tanh(x)));
    EXPECT_EQ(g.value(g.apply(ad::Op::Softmax, inputs)), g.value(g.softmax(x)));
    const Expr pair[] = {x, x};
    EXPECT_EQ(g.value(g.apply(ad::Op::Add, pair)), g.value(g.add(x, x)));
    EXPECT_THROW(g.apply(ad::Op::Add, inputs), ShapeError);
    EXPECT_THROW(g.apply(ad::Op::Slice, inputs), InputError);
}

TEST(Autodiff, BackwardTanhAtZero) {
    Graph g;
    const Expr x = g.variable(Tensor::from({0.0}));
    g.backward(g.sum(g.tanh(x)));
    EXPECT_DOUBLE_EQ(g.grad(x)[0], 1.0);
}

TEST(Autodiff, SharedNodeAccumulates) {
    Graph g;
    const Expr x = g.variable(Tensor::from({3.0}));
    g.backward(g.sum(g.mul(x, x)));
    EXPECT_DOUBLE_EQ(g.grad(x)[0], 6.0);
}

TEST(Autodiff, ReuseEqualsSumOfPaths) {
    // y = tanh(x) + 2x; dy/dx = (1 - tanh^2 x) + 2, summed over both paths.
    Graph g;
    const Expr x = g.variable(Tensor::from({0.4}));
    g.backward(g.sum(g.add(g.tanh(x), g.scale(x, 2.0))));
    const double t = std::tanh(0.4);
    EXPECT_NEAR(g.grad(x)[0], (1.0 - t * t) + 2.0, 1e-15);
}

TEST(Autodiff, CrossEntropyOfSoftmaxGradient) {
    const Tensor z = Tensor::from({0.5, -1.0, 2.0, 0.1});
    Graph g;
    const Expr x = g.variable(z);
    const Expr p = g.softmax(x);
    g.backward(g.cross_entropy(p, 2));
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double expected = g.value(p)[i] - (i == 2 ? 1.0 : 0.0);
        EXPECT_NEAR(g.grad(x)[i], expected, 1e-15);
    }
}

TEST(Autodiff, NonScalarRootRejected) {
    Graph g;
    const Expr x = g.variable(Tensor::from({1.0, 2.0}));
    EXPECT_THROW(g.backward(g.tanh(x)), ShapeError);
}

TEST(Autodiff, ParametersAccumulateAcrossBackwardCalls) {
    ad::Parameter p("w", Tensor::from({2.0}));
    for (int i = 0; i < 2; ++i) {
        Graph g;
        g.backward(g.sum(g.scale(g.param(p), 3.0)));
    }
    EXPECT_DOUBLE_EQ(p.grad[0], 6.0);
    p.zero_grad();
    EXPECT_DOUBLE_EQ(p.grad[0], 0.0);
}

TEST(Autodiff, ConstantsReceiveNoGradient) {
    const Tensor c = Tensor::from({1.0, 2.0});
    Graph g;
    const Expr k = g.constant(c);
    const Expr x = g.variable(Tensor::from({0.5, 0.5}));
    g.backward(g.sum(g.mul(k, x)));
    EXPECT_TRUE(g.grad(k).empty());
    EXPECT_EQ(g.grad(x), c);
}

TEST(CrossEntropy, Examples) {
    Graph g;
    EXPECT_DOUBLE_EQ(g.value(g.cross_entropy(g.input(Tensor::from({1.0, 0.0, 0.0})), 0))[0], 0.0);
    Tensor uniform = Tensor::vector(12);
    uniform.fill(1.0 / 12.0);
    EXPECT_NEAR(g.value(g.cross_entropy(g.input(uniform), 5))[0], std::log(12.0), 1e-12);
    EXPECT_NEAR(g.value(g.cross_entropy(g.input(Tensor::from({0.7, 0.2, 0.1})), 1))[0], 1.6094379124341003, 1e-12);
    EXPECT_EQ(g.clamp_events(), 0u);
}

TEST(CrossEntropy, ZeroProbabilityIsClampedAndCounted) {
    Graph g;
    const Expr loss = g.cross_entropy(g.input(Tensor::from({1.0, 0.0, 0.0})), 1);
    EXPECT_NEAR(g.value(loss)[0], -std::log(ad::kProbabilityFloor), 1e-9);
    EXPECT_EQ(g.clamp_events(), 1u);
}

TEST(CrossEntropy, OneHotOverloadMatchesIndex) {
    Graph g;
    const Expr p = g.input(Tensor::from({0.7, 0.2, 0.1}));
    EXPECT_DOUBLE_EQ(g.value(g.cross_entropy(p, Tensor::from({0.0, 1.0, 0.0})))[0],
                     g.value(g.cross_entropy(p, 1))[0]);
    EXPECT_THROW(g.cross_entropy(p, Tensor::from({0.5, 0.5, 0.0})), InputError);
}

TEST(CrossEntropy, RejectsInvalidInputs) {
    Graph g;
    EXPECT_THROW(g.cross_entropy(g.input(Tensor::from({0.5, 0.6})), 0), InputError);
    EXPECT_THROW(g.cross_entropy(g.input(Tensor::from({0.5, 0.5})), 2), ShapeError);
    EXPECT_THROW(g.cross_entropy(g.input(Tensor::from({1.5, -0.5})), 0), InputError);
}

// Diverged weights must surface as a NaN loss for the trainer to report.
TEST(CrossEntropy, NonFiniteInputGivesNanLoss) {
    Graph g;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const Expr logits = g.input(Tensor::from({nan, 0.0, 1.0}));
    EXPECT_TRUE(std::isnan(g.value(g.cross_entropy(g.softmax(logits), 2))[0]));
    EXPECT_TRUE(std::isnan(g.value(g.cross_entropy(g.input(Tensor::from({0.5, nan})), 0))[0]));
}

TEST(Softmax, PositiveAndNormalizedForLargeLogits) {
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        Tensor z = Tensor::vector(1 + rng.below(12));
        for (double &v : z.data()) v = rng.uniform(-50.0, 50.0);
        Graph g;
        const Tensor &p = g.value(g.softmax(g.input(z)));
        double total = 0.0;
        for (double v : p.data()) {
            EXPECT_GT(v, 0.0);
            total += v;
        }
        EXPECT_NEAR(total, 1.0, 1e-9);
    }
}

class GradientCase : public ::testing::TestWithParam<std::string> {};

TEST_P(GradientCase, MatchesFiniteDifferences) {
    Rng rng(0xC0FFEE);
    for (int instance = 0; instance < 50; ++instance) {
        const auto report = check_operation(GetParam(), rng);
        ASSERT_LT(report.max_rel_error, 1e-4) << GetParam() << " instance " << instance;
        ASSERT_GT(report.coordinates, 0u);
    }
}

INSTANTIATE_TEST_SUITE_P(AllOps, GradientCase, ::testing::ValuesIn(gradient_cases()),
                         [](const auto &info) { return info.param; });

}  // namespace
}  // namespace xltag

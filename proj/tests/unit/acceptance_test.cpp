#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "rcdiff/acceptance.hpp"
#include "rcdiff/oracle.hpp"
#include "test_support.hpp"

namespace rcdiff {
namespace {

AlignedAutomaton cat_aligned() { return align(testing::cat_dfa(), testing::cat_vocab()); }

TEST(TransitionWeight, CatExample) {
    auto a = cat_aligned();
    auto u = testing::cat_unigram();
    EXPECT_DOUBLE_EQ(transition_weight(a, u, 1, 0, 1), 0.7);
    EXPECT_DOUBLE_EQ(transition_weight(a, u, 2, 1, 2), 0.3);
    EXPECT_DOUBLE_EQ(transition_weight(a, u, 2, 1, 3), 0.5);
    EXPECT_DOUBLE_EQ(transition_weight(a, u, 1, 1, 2), 0.1);
    EXPECT_EQ(transition_weight(a, u, 2, 0, 4), 0.0);
    EXPECT_THROW(transition_weight(a, u, 4, 0, 1), ValidationError);
}

TEST(ExpectedProbability, CatExampleIsPointTwoEight) {
    auto r = expected_probability(cat_aligned(), testing::cat_unigram());
    EXPECT_NEAR(r.expected, 0.28, 1e-12);
    EXPECT_NEAR(r.log_expected, std::log(0.28), 1e-12);
    EXPECT_FALSE(r.gradient.has_value());
}

TEST(ExpectedProbability, DotStarIsCertain) {
    std::mt19937_64 rng(3);
    Alphabet sigma("abc");
    auto a = align(minimize(compile(".*", sigma)), Vocabulary({"a", "b", "c"}));
    for (int l : {0, 1, 5, 17}) {
        auto r = expected_probability(a, testing::random_unigram(rng, l, 3));
        EXPECT_NEAR(r.expected, 1.0, 1e-12);
        EXPECT_NEAR(r.log_expected, 0.0, 1e-12);
    }
}

TEST(ExpectedProbability, DimensionMismatch) {
    EXPECT_THROW(expected_probability(cat_aligned(), UnigramMatrix::Constant(3, 4, 0.25)), ValidationError);
}

TEST(ExpectedProbability, ZeroWhenNoAcceptedSequence) {
    auto r = expected_probability(cat_aligned(), UnigramMatrix::Constant(2, 5, 0.2));
    EXPECT_EQ(r.expected, 0.0);
    EXPECT_EQ(r.log_expected, kNegInf);
}

TEST(ExpectedProbability, MatchesBruteForceOnRandomInstances) {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 300; ++trial) {
        auto a = testing::random_aligned(rng, 8, 6);
        int l = std::uniform_int_distribution<int>(0, 5)(rng);
        auto u = testing::random_unigram(rng, l, static_cast<int>(a.vocabulary().size()));
        auto r = expected_probability(a, u);
        double want = oracle::brute_force_expected(a, u);
        ASSERT_NEAR(r.expected, want, 1e-9) << "trial " << trial;
        ASSERT_GE(r.expected, 0.0);
        ASSERT_LE(r.expected, 1.0 + 1e-12);
        if (want > 0) {
            ASSERT_NEAR(std::exp(r.log_expected), r.expected, 1e-9 * r.expected);
        }
    }
}

TEST(ForwardPass, NormalizedVectorsSumToOne) {
    auto fs = forward_pass(cat_aligned(), testing::cat_unigram());
    ASSERT_EQ(fs.normalized.size(), 4u);
    EXPECT_EQ(fs.normalized[0](0), 1.0);
    EXPECT_EQ(fs.log_scale[0], 0.0);
    for (const auto& p : fs.normalized) EXPECT_NEAR(p.sum(), 1.0, 1e-12);
    // only q0 carries mass before the first step, and only 'c' leaves it
    EXPECT_NEAR(std::exp(fs.log_scale[1]), 0.7, 1e-12);
}

TEST(ExpectedProbabilityWithGrad, CatExampleHandValues) {
    auto r = expected_probability_with_grad(cat_aligned(), testing::cat_unigram());
    ASSERT_TRUE(r.gradient.has_value());
    const auto& g = *r.gradient;
    // dE/du[1][c] = 1 * (0.3 * 0.5 + 0.5 * 0.5)
    EXPECT_NEAR(g(0, 1), 0.40, 1e-12);
    // dE/du[2][a] = 0.7 * 0.5, dE/du[2][u] = 0.7 * 0.5, dE/du[3][t] = 0.7 * 0.8
    EXPECT_NEAR(g(1, 0), 0.35, 1e-12);
    EXPECT_NEAR(g(1, 4), 0.35, 1e-12);
    EXPECT_NEAR(g(2, 3), 0.56, 1e-12);
    // tokens that label no useful transition at that step
    EXPECT_EQ(g(0, 0), 0.0);
    EXPECT_EQ(g(0, 2), 0.0);
    EXPECT_EQ(g(2, 1), 0.0);
    EXPECT_EQ(g(1, 1), 0.0);
}

TEST(ExpectedProbabilityWithGrad, MatchesFiniteDifferences) {
    std::mt19937_64 rng(1234);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        auto a = testing::random_aligned(rng);
        int l = std::uniform_int_distribution<int>(1, 5)(rng);
        auto u = testing::random_unigram(rng, l, static_cast<int>(a.vocabulary().size()));
        auto r = expected_probability_with_grad(a, u);
        auto fd = oracle::finite_difference(
            [&](const Eigen::MatrixXd& x) { return expected_probability(a, x).expected; }, u, 1e-5);
        worst = std::max(worst, testing::max_relative_error(*r.gradient, fd));
    }
    EXPECT_LE(worst, 1e-4);
}

TEST(LogGrad, CatExampleRatio) {
    auto g = log_grad_wrt_unigram(cat_aligned(), testing::cat_unigram());
    EXPECT_NEAR(g(0, 1), 0.40 / 0.28, 1e-12);
    EXPECT_NEAR(g(0, 1), 1.4286, 1e-4);
}

TEST(LogGrad, ConstantLanguageHasZeroGradient) {
    std::mt19937_64 rng(5);
    auto a = align(minimize(compile(".*", Alphabet("ab"))), Vocabulary({"a", "b"}));
    auto u = testing::random_unigram(rng, 6, 2);
    auto g = log_grad_wrt_unigram(a, u);
    // E is identically the product of row sums, so d log E/du = 1 everywhere,
    // and any direction that keeps the rows stochastic has zero derivative.
    for (int k = 0; k < 6; ++k) EXPECT_NEAR(g(k, 0) - g(k, 1), 0.0, 1e-12);
}

TEST(LogGrad, SmoothedSurrogateWhenAllMassIsOffLanguage) {
    // Vocabulary {A, B}, language {A}, one position with all mass on B.
    Alphabet sigma("AB");
    auto a = align(compile("A", sigma), Vocabulary({"A", "B"}));
    UnigramMatrix u(1, 2);
    u << 0.0, 1.0;
    ASSERT_EQ(expected_probability(a, u).expected, 0.0);
    LogGradOptions opts;
    auto g = log_grad_wrt_unigram(a, u, opts);
    // smoothed u = (lambda/2, 1 - lambda/2); d log(u_A)/du_A = (1 - lambda) * 2 / lambda
    const double lambda = opts.smoothing;
    EXPECT_NEAR(g(0, 0), (1.0 - lambda) * 2.0 / lambda, 1e-6);
    EXPECT_GT(g(0, 0), 0.0);
    EXPECT_EQ(g(0, 1), 0.0);
    EXPECT_TRUE(g.allFinite());
}

TEST(LogGrad, UnreachableLengthGivesZero) {
    auto a = cat_aligned();
    auto g = log_grad_wrt_unigram(a, UnigramMatrix::Constant(2, 5, 0.2));
    EXPECT_TRUE(g.isZero());
}

TEST(LogGrad, MatchesFiniteDifferencesOfLogE) {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 50; ++trial) {
        auto a = testing::random_aligned(rng);
        int l = std::uniform_int_distribution<int>(1, 5)(rng);
        auto u = testing::random_unigram(rng, l, static_cast<int>(a.vocabulary().size()), false);
        auto r = expected_probability(a, u);
        if (r.expected < 1e-6) continue;
        auto g = log_grad_wrt_unigram(a, u);
        auto fd = oracle::finite_difference(
            [&](const Eigen::MatrixXd& x) { return expected_probability(a, x).log_expected; }, u, 1e-6);
        EXPECT_LE(testing::max_relative_error(g, fd, 1e-3), 1e-4) << "trial " << trial;
    }
}

TEST(Multilinearity, LinearInEachRow) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        auto a = testing::random_aligned(rng);
        int l = std::uniform_int_distribution<int>(1, 5)(rng);
        int v = static_cast<int>(a.vocabulary().size());
        auto u = testing::random_unigram(rng, l, v);
        auto other = testing::random_unigram(rng, 1, v);
        int k = std::uniform_int_distribution<int>(0, l - 1)(rng);
        UnigramMatrix u2 = u;
        u2.row(k) = other.row(0);
        double e1 = expected_probability(a, u).expected;
        double e2 = expected_probability(a, u2).expected;
        for (double lambda : {0.0, 0.5, 1.0}) {
            UnigramMatrix mix = u;
            mix.row(k) = lambda * u.row(k) + (1.0 - lambda) * u2.row(k);
            EXPECT_NEAR(expected_probability(a, mix).expected, lambda * e1 + (1.0 - lambda) * e2, 1e-12);
        }
    }
}

TEST(ScaleStability, LongSequences) {
    Alphabet sigma("ab");
    Vocabulary vocab({"a", "b"});
    UnigramMatrix half = UnigramMatrix::Constant(64, 2, 0.5);

    auto all = align(minimize(compile(".*", sigma)), vocab);
    EXPECT_NEAR(expected_probability(all, half).log_expected, 0.0, 1e-9);

    auto single = align(minimize(compile("a{64}", sigma)), vocab);
    auto r = expected_probability(single, half);
    EXPECT_NEAR(r.log_expected, 64.0 * std::log(0.5), 1e-9);

    // Far below double range in linear space, still exact in log space.
    UnigramMatrix tiny = UnigramMatrix::Constant(512, 2, 0.0);
    tiny.col(0).setConstant(1e-3);
    tiny.col(1).setConstant(1.0 - 1e-3);
    auto deep = align(minimize(compile("a*", sigma)), vocab);
    auto rd = expected_probability(deep, tiny);
    EXPECT_EQ(rd.expected, 0.0);
    EXPECT_NEAR(rd.log_expected, 512.0 * std::log(1e-3), 1e-9);
    auto g = log_grad_wrt_unigram(deep, tiny, {.floor = 0.0, .smoothing = 1e-6});
    EXPECT_NEAR(g(0, 0), 1e3, 1e-6);
    EXPECT_EQ(g(0, 1), 0.0);
}

}  // namespace
}  // namespace rcdiff

#include <random>

#include <gtest/gtest.h>

#include "rcdiff/dfa.hpp"
#include "rcdiff/oracle.hpp"
#include "test_support.hpp"

namespace rcdiff {
namespace {

using testing::all_strings;

TEST(Compile, CatExampleHasFiveStatesInDiscoveryOrder) {
    Dfa dfa = testing::cat_dfa();
    ASSERT_EQ(dfa.num_states, 5);
    const Alphabet& s = dfa.alphabet;
    // q0 -c-> q1; q1 -a-> q2; q1 -u-> q3; q2 -t-> q4; q3 -t-> q4
    EXPECT_EQ(dfa.next(0, *s.index_of('c')), 1);
    EXPECT_EQ(dfa.next(1, *s.index_of('a')), 2);
    EXPECT_EQ(dfa.next(1, *s.index_of('u')), 3);
    EXPECT_EQ(dfa.next(2, *s.index_of('t')), 4);
    EXPECT_EQ(dfa.next(3, *s.index_of('t')), 4);
    EXPECT_EQ(dfa.num_transitions(), 5u);
    EXPECT_EQ(dfa.accepting_states(), std::vector<StateId>{4});
}

TEST(Compile, AlternationOfLiterals) {
    Dfa dfa = compile("a|b", Alphabet("ab"));
    EXPECT_TRUE(accepts(dfa, "a"));
    EXPECT_TRUE(accepts(dfa, "b"));
    EXPECT_FALSE(accepts(dfa, ""));
    EXPECT_FALSE(accepts(dfa, "ab"));
}

TEST(Compile, DotStarMinimizesToOneState) {
    Alphabet sigma("abc ");
    Dfa dfa = minimize(compile(".*", sigma));
    ASSERT_EQ(dfa.num_states, 1);
    EXPECT_TRUE(dfa.is_accepting(0));
    for (std::size_t sym = 0; sym < sigma.size(); ++sym) EXPECT_EQ(dfa.next(0, sym), 0);
}

TEST(Compile, StateCapIsEnforced) {
    Alphabet sigma("ab");
    // (a|b)*a(a|b){12} needs 2^13 DFA states.
    CompileOptions opts;
    opts.state_cap = 1000;
    EXPECT_THROW(compile("(a|b)*a(a|b){12}", sigma, opts), LimitError);
    EXPECT_NO_THROW(compile("(a|b)*a(a|b){4}", sigma, opts));
}

TEST(Minimize, CatExampleMergesTheVowelStates) {
    Dfa m = minimize(testing::cat_dfa());
    EXPECT_EQ(m.num_states, 4);
    EXPECT_TRUE(accepts(m, "cat"));
    EXPECT_TRUE(accepts(m, "cut"));
    EXPECT_FALSE(accepts(m, "car"));
}

TEST(Minimize, IsIdempotent) {
    Dfa once = minimize(testing::cat_dfa());
    Dfa twice = minimize(once);
    EXPECT_EQ(once, twice);
}

TEST(Minimize, EmptyLanguageIsSingleRejectingState) {
    Alphabet sigma("ab");
    Dfa dfa(sigma, 2, 0);
    dfa.set_next(0, 0, 1);  // no accepting state at all
    Dfa m = minimize(dfa);
    EXPECT_EQ(m.num_states, 1);
    EXPECT_FALSE(m.is_accepting(0));
    EXPECT_EQ(m.num_transitions(), 0u);
}

TEST(Accepts, CatExample) {
    Dfa dfa = testing::cat_dfa();
    EXPECT_TRUE(accepts(dfa, "cat"));
    EXPECT_TRUE(accepts(dfa, "cut"));
    EXPECT_FALSE(accepts(dfa, "car"));
    EXPECT_FALSE(accepts(dfa, "ca"));
    EXPECT_THROW(accepts(dfa, "cot"), ValidationError);
}

TEST(Accepts, AnchoredSemantics) {
    Dfa dfa = compile("ab", Alphabet("ab"));
    EXPECT_FALSE(accepts(dfa, "aab"));
    EXPECT_FALSE(accepts(dfa, "abb"));
}

// Random ASTs (depth <= 5, alphabet <= 6): the compiled and the minimized DFA
// agree with direct AST interpretation on every string of length <= 6, and
// the empty string is accepted iff the AST is nullable.
TEST(CompileProperty, AgreesWithAstInterpreter) {
    std::mt19937_64 rng(20240611);
    static const std::string letters = "abcdef";
    int checked = 0;
    for (int trial = 0; trial < 500; ++trial) {
        int n = std::uniform_int_distribution<int>(1, 6)(rng);
        const int max_len = 6;
        Alphabet sigma(letters.substr(0, static_cast<std::size_t>(n)));
        RegexAst ast = testing::random_ast(rng, sigma, 5);
        Dfa dfa = compile(ast, sigma);
        Dfa min = minimize(dfa);
        ASSERT_LE(min.num_states, dfa.num_states);
        ASSERT_EQ(accepts(dfa, ""), nullable(ast));
        for (const auto& s : all_strings(sigma.chars(), static_cast<std::size_t>(max_len))) {
            bool want = oracle::ast_matches(ast, s);
            ASSERT_EQ(accepts(dfa, s), want) << "trial " << trial << " string '" << s << "'";
            ASSERT_EQ(accepts(min, s), want) << "trial " << trial << " string '" << s << "'";
            ++checked;
        }
    }
    EXPECT_GT(checked, 10000);
}

TEST(CompileProperty, ReachableAndDeterministic) {
    std::mt19937_64 rng(7);
    Alphabet sigma("abc");
    for (int trial = 0; trial < 100; ++trial) {
        Dfa dfa = minimize(compile(testing::random_ast(rng, sigma, 4), sigma));
        dfa.validate();
        std::vector<bool> seen(static_cast<std::size_t>(dfa.num_states), false);
        std::vector<StateId> stack{dfa.start};
        seen[static_cast<std::size_t>(dfa.start)] = true;
        while (!stack.empty()) {
            StateId q = stack.back();
            stack.pop_back();
            for (std::size_t sym = 0; sym < sigma.size(); ++sym)
                if (StateId t = dfa.next(q, sym); t != kNoState && !seen[static_cast<std::size_t>(t)]) {
                    seen[static_cast<std::size_t>(t)] = true;
                    stack.push_back(t);
                }
        }
        for (bool b : seen) EXPECT_TRUE(b);
    }
}

}  // namespace
}  // namespace rcdiff

#include <random>

#include <gtest/gtest.h>

#include "rcdiff/io.hpp"
#include "test_support.hpp"

namespace rcdiff {
namespace {

TEST(DfaText, RoundTripIsByteExact) {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 30; ++trial) {
        Dfa dfa = testing::random_small_dfa(rng, 20);
        std::string text = io::dfa_to_text(dfa);
        Dfa back = io::dfa_from_text(text);
        EXPECT_EQ(back, dfa);
        EXPECT_EQ(io::dfa_to_text(back), text);
    }
}

TEST(DfaText, AlphabetWithSpecialCharacters) {
    Alphabet sigma("a \"\\{");
    Dfa dfa = minimize(compile("a \\\"\\\\\\{", sigma));
    EXPECT_EQ(io::dfa_from_text(io::dfa_to_text(dfa)), dfa);
}

TEST(DfaText, RejectsMalformedDocuments) {
    EXPECT_THROW(io::dfa_from_text("not json"), ValidationError);
    EXPECT_THROW(io::dfa_from_text(R"({"format":"rcdiff.dfa","version":2})"), ValidationError);
    EXPECT_THROW(io::dfa_from_text(
                     R"({"format":"rcdiff.dfa","version":1,"alphabet":"ab","states":1,"start":0,)"
                     R"("accepting":[3],"transitions":[]})"),
                 ValidationError);
    EXPECT_THROW(io::dfa_from_text(
                     R"({"format":"rcdiff.dfa","version":1,"alphabet":"ab","states":1,"start":0,)"
                     R"("accepting":[0],"transitions":[[0,"z",0]]})"),
                 ValidationError);
}

TEST(VocabularyText, RoundTripWithEscapesAndPad) {
    Vocabulary vocab({"the", " ", "a\\b", "_", "x y"}, 3);
    std::string text = io::vocabulary_to_text(vocab);
    EXPECT_EQ(text, "\\pad 3\nthe\n\\s\na\\\\b\n_\nx\\sy\n");
    Vocabulary back = io::vocabulary_from_text(text);
    EXPECT_EQ(back, vocab);
    EXPECT_EQ(io::vocabulary_to_text(back), text);
    EXPECT_THROW(io::vocabulary_from_text("a\n\nb\n"), ValidationError);
    EXPECT_THROW(io::vocabulary_from_text("a\\q\n"), ValidationError);
}

TEST(AlignedText, RoundTripIsByteExact) {
    std::mt19937_64 rng(32);
    for (int trial = 0; trial < 30; ++trial) {
        auto a = testing::random_aligned(rng);
        std::string text = io::aligned_to_text(a);
        auto back = io::aligned_from_text(text);
        EXPECT_EQ(back, a);
        EXPECT_EQ(io::aligned_to_text(back), text);
    }
}

TEST(UnigramText, RoundTripIsBitExact) {
    std::mt19937_64 rng(33);
    auto u = testing::random_unigram(rng, 7, 5);
    std::string text = io::unigram_to_text(u);
    auto back = io::unigram_from_text(text);
    for (Eigen::Index i = 0; i < u.size(); ++i) EXPECT_EQ(back.data()[i], u.data()[i]);
    EXPECT_EQ(io::unigram_to_text(back), text);
}

TEST(UnigramText, RejectsNonStochasticRows) {
    EXPECT_THROW(io::unigram_from_text(
                     R"({"format":"rcdiff.unigram","version":1,"rows":1,"cols":2,"data":[0.5,0.6]})"),
                 ValidationError);
    EXPECT_THROW(io::unigram_from_text(
                     R"({"format":"rcdiff.unigram","version":1,"rows":2,"cols":2,"data":[0.5,0.5]})"),
                 ValidationError);
}

}  // namespace
}  // namespace rcdiff

#pragma once

// Synthetic two-branch English-like corpus for the toy model.
//
//   A: "the adj noun adverb verb the|a adj noun"
//   B: "it verb the|a noun and the|a adj noun"
//
// Both branches have eight words (fifteen tokens), so every word sits at a
// fixed token index and a single pad closes each sequence.
// Tokens are whole words, a single space and the pad character '_'.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "rcdiff/alignment.hpp"
#include "rcdiff/dfa.hpp"

namespace rcdiff::toy {

inline const std::vector<std::string>& nouns() {
    static const std::vector<std::string> v{"cat", "dog", "fox", "owl", "cow", "hen", "bee", "elk"};
    return v;
}
inline const std::vector<std::string>& verbs() {
    static const std::vector<std::string> v{"sees", "likes", "eats", "finds", "hears"};
    return v;
}
inline const std::vector<std::string>& adjectives() {
    static const std::vector<std::string> v{"big", "red", "old", "shy", "tiny"};
    return v;
}
inline const std::vector<std::string>& adverbs() {
    static const std::vector<std::string> v{"often", "never", "also", "still"};
    return v;
}

inline constexpr char kPadChar = '_';

/// Lowercase letters, space and the pad character.
inline Alphabet alphabet() { return Alphabet("abcdefghijklmnopqrstuvwxyz _"); }

/// Function words, nouns, verbs, adjectives, adverbs, then " " and the pad token.
inline Vocabulary vocabulary() {
    std::vector<std::string> tokens{"the", "a", "it", "and"};
    for (const auto* group : {&nouns(), &verbs(), &adjectives(), &adverbs()}) tokens.insert(tokens.end(), group->begin(), group->end());
    tokens.emplace_back(" ");
    tokens.emplace_back(std::string(1, kPadChar));
    const auto pad = static_cast<TokenId>(tokens.size() - 1);
    return Vocabulary(std::move(tokens), pad);
}

/// Every word that can occur in a sentence.
inline std::vector<std::string> word_pool() {
    std::vector<std::string> words{"the", "a", "it", "and"};
    for (const auto* group : {&nouns(), &verbs(), &adjectives(), &adverbs()}) words.insert(words.end(), group->begin(), group->end());
    return words;
}

struct CorpusOptions {
    std::size_t sentences = 4000;
    double branch_a_fraction = 0.75;
    std::uint64_t seed = 1;
};

/// Sentences without padding, A-branch with probability branch_a_fraction.
inline std::vector<std::string> generate_sentences(const CorpusOptions& opts) {
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto pick = [&](const std::vector<std::string>& v) {
        return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
    };
    std::vector<std::string> out;
    out.reserve(opts.sentences);
    for (std::size_t i = 0; i < opts.sentences; ++i) {
        const bool a_branch = unit(rng) < opts.branch_a_fraction;
        auto det = [&]() { return std::string(unit(rng) < 0.5 ? "the" : "a"); };
        if (a_branch)
            out.push_back("the " + pick(adjectives()) + " " + pick(nouns()) + " " + pick(adverbs()) + " " +
                          pick(verbs()) + " " + det() + " " + pick(adjectives()) + " " + pick(nouns()));
        else
            out.push_back("it " + pick(verbs()) + " " + det() + " " + pick(nouns()) + " and " + det() + " " +
                          pick(adjectives()) + " " + pick(nouns()));
    }
    return out;
}

/// Tokenizes and right-pads each sentence to `length` tokens.
inline std::vector<std::vector<TokenId>> encode(const std::vector<std::string>& sentences, const Vocabulary& vocab,
                                                int length) {
    std::vector<std::vector<TokenId>> out;
    out.reserve(sentences.size());
    for (const auto& s : sentences) {
        auto ids = vocab.tokenize(s);
        if (static_cast<int>(ids.size()) > length) throw ValidationError("sentence longer than the sequence length");
        if (!vocab.pad()) throw ValidationError("vocabulary has no pad token");
        ids.resize(static_cast<std::size_t>(length), *vocab.pad());
        out.push_back(std::move(ids));
    }
    return out;
}

}  // namespace rcdiff::toy

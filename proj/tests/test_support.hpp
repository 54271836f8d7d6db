#pragma once

// Shared fixtures and random instance generators for the test suites.

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rcdiff/acceptance.hpp"
#include "rcdiff/alignment.hpp"
#include "rcdiff/dfa.hpp"
#include "rcdiff/regex.hpp"

namespace rcdiff::testing {

// The c(a|u)t example: vocabulary {a, c, r, t, u}, three positions.
inline Alphabet cat_alphabet() { return Alphabet("acrtu"); }
inline Vocabulary cat_vocab() { return Vocabulary({"a", "c", "r", "t", "u"}); }
inline Dfa cat_dfa() { return compile("c(a|u)t", cat_alphabet()); }

inline UnigramMatrix cat_unigram() {
    UnigramMatrix u(3, 5);
    //       a    c    r    t    u
    u << 0.1, 0.7, 0.2, 0.0, 0.0,
         0.3, 0.0, 0.1, 0.1, 0.5,
         0.0, 0.2, 0.3, 0.5, 0.0;
    return u;
}

inline std::vector<std::string> all_strings(const std::string& alphabet, std::size_t max_len) {
    std::vector<std::string> out{""};
    std::size_t begin = 0;
    for (std::size_t len = 1; len <= max_len; ++len) {
        std::size_t end = out.size();
        for (std::size_t i = begin; i < end; ++i)
            for (char c : alphabet) out.push_back(out[i] + c);
        begin = end;
    }
    return out;
}

inline RegexAst random_ast(std::mt19937_64& rng, const Alphabet& alphabet, int depth) {
    std::uniform_int_distribution<int> pick_char(0, static_cast<int>(alphabet.size()) - 1);
    auto leaf = [&]() {
        int kind = std::uniform_int_distribution<int>(0, 9)(rng);
        if (kind == 0) return RegexAst::wildcard(alphabet);
        if (kind <= 2) {
            std::vector<char> members;
            int n = std::uniform_int_distribution<int>(1, static_cast<int>(alphabet.size()))(rng);
            for (int i = 0; i < n; ++i) members.push_back(alphabet.at(static_cast<std::size_t>(pick_char(rng))));
            return RegexAst::char_class(members);
        }
        if (kind == 3) return RegexAst::empty();
        return RegexAst::literal(alphabet.at(static_cast<std::size_t>(pick_char(rng))));
    };
    if (depth <= 1) return leaf();
    int kind = std::uniform_int_distribution<int>(0, 9)(rng);
    auto sub = [&]() { return random_ast(rng, alphabet, depth - 1); };
    switch (kind) {
        case 0:
        case 1: {
            std::vector<RegexAst> parts;
            int n = std::uniform_int_distribution<int>(2, 3)(rng);
            for (int i = 0; i < n; ++i) parts.push_back(sub());
            return RegexAst::concat(std::move(parts));
        }
        case 2:
        case 3: {
            std::vector<RegexAst> parts;
            int n = std::uniform_int_distribution<int>(2, 3)(rng);
            for (int i = 0; i < n; ++i) parts.push_back(sub());
            return RegexAst::alternation(std::move(parts));
        }
        case 4: return RegexAst::unary(RegexKind::Star, sub());
        case 5: return RegexAst::unary(RegexKind::Plus, sub());
        case 6: return RegexAst::unary(RegexKind::Optional, sub());
        case 7: {
            int m = std::uniform_int_distribution<int>(0, 2)(rng);
            bool unbounded = std::uniform_int_distribution<int>(0, 3)(rng) == 0;
            int n = unbounded ? RegexAst::kUnbounded : m + std::uniform_int_distribution<int>(0, 2)(rng);
            return RegexAst::repeat(sub(), m, n);
        }
        case 8: return RegexAst::group(sub());
        default: return leaf();
    }
}

/// Random vocabulary over `alphabet`: unique tokens of length 1..max_len.
inline Vocabulary random_vocab(std::mt19937_64& rng, const Alphabet& alphabet, int max_tokens, int max_len) {
    std::uniform_int_distribution<int> pick_char(0, static_cast<int>(alphabet.size()) - 1);
    std::set<std::string> seen;
    std::vector<std::string> tokens;
    int target = std::uniform_int_distribution<int>(2, max_tokens)(rng);
    for (int attempt = 0; attempt < 200 && static_cast<int>(tokens.size()) < target; ++attempt) {
        int len = std::uniform_int_distribution<int>(1, max_len)(rng);
        std::string tok;
        for (int i = 0; i < len; ++i) tok.push_back(alphabet.at(static_cast<std::size_t>(pick_char(rng))));
        if (seen.insert(tok).second) tokens.push_back(tok);
    }
    return Vocabulary(tokens);
}

/// A minimized DFA with at most `max_states` states over a 2-4 letter alphabet.
inline Dfa random_small_dfa(std::mt19937_64& rng, int max_states, int depth = 4) {
    static const std::string letters = "abcd";
    while (true) {
        int n = std::uniform_int_distribution<int>(2, 4)(rng);
        Alphabet alphabet(letters.substr(0, static_cast<std::size_t>(n)));
        Dfa dfa = minimize(compile(random_ast(rng, alphabet, depth), alphabet));
        if (dfa.num_states <= max_states) return dfa;
    }
}

/// Random row-stochastic matrix; roughly a quarter of entries are exactly zero.
inline UnigramMatrix random_unigram(std::mt19937_64& rng, int rows, int cols, bool allow_zeros = true) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    UnigramMatrix u(rows, cols);
    for (int k = 0; k < rows; ++k) {
        double sum = 0.0;
        for (int j = 0; j < cols; ++j) {
            double v = unit(rng);
            if (allow_zeros && unit(rng) < 0.25) v = 0.0;
            u(k, j) = v;
            sum += v;
        }
        if (sum == 0.0) {
            u(k, 0) = 1.0;
            sum = 1.0;
        }
        u.row(k) /= sum;
    }
    return u;
}

/// max over entries of |a - b| / max(|a|, |b|, floor).
inline double max_relative_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double floor = 1e-8) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            double scale = std::max({std::abs(a(i, j)), std::abs(b(i, j)), floor});
            worst = std::max(worst, std::abs(a(i, j) - b(i, j)) / scale);
        }
    return worst;
}

/// Random aligned automaton: minimized DFA with <= 8 states, vocabulary of
/// <= 8 tokens of length <= 3 that always contains some multi-character token.
inline AlignedAutomaton random_aligned(std::mt19937_64& rng, int max_states = 8, int max_tokens = 8) {
    while (true) {
        Dfa dfa = random_small_dfa(rng, max_states);
        Vocabulary vocab = random_vocab(rng, dfa.alphabet, max_tokens, 3);
        bool multi = false;
        for (const auto& t : vocab.tokens()) multi = multi || t.size() > 1;
        if (!multi) continue;
        return align(dfa, vocab);
    }
}

}  // namespace rcdiff::testing

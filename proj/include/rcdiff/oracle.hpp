#pragma once

// Slow, independent reference implementations used only to verify the
// production code paths. Nothing in the sampling pipeline includes this
// header.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "rcdiff/alignment.hpp"
#include "rcdiff/dfa.hpp"
#include "rcdiff/error.hpp"
#include "rcdiff/regex.hpp"

namespace rcdiff::oracle {

struct EnumerationBudget {
    std::size_t max_sequences = 10'000'000;
    std::size_t max_length = 64;
};

/// Sum over every token sequence s of length u.rows() of
/// [s accepted] * prod_k u(k, s_k). Sequences are visited in token-id
/// lexicographic order.
inline double brute_force_expected(const AlignedAutomaton& a, const Eigen::MatrixXd& u,
                                   const EnumerationBudget& budget = {}) {
    const auto v = static_cast<std::size_t>(u.cols());
    const auto l = static_cast<std::size_t>(u.rows());
    if (v != a.vocabulary().size()) throw ValidationError("unigram width does not match vocabulary");
    if (l > budget.max_length) throw LimitError("sequence length exceeds the enumeration budget");
    double count = 1.0;
    for (std::size_t k = 0; k < l; ++k) count *= static_cast<double>(v);
    if (count > static_cast<double>(budget.max_sequences))
        throw LimitError("enumeration budget exceeded");
    if (v == 0) return l == 0 && a.is_accepting(a.start()) ? 1.0 : 0.0;

    std::vector<TokenId> seq(l, 0);
    double total = 0.0;
    while (true) {
        if (accepts_tokens(a, seq)) {
            double p = 1.0;
            for (std::size_t k = 0; k < l; ++k) p *= u(static_cast<Eigen::Index>(k), seq[k]);
            total += p;
        }
        // odometer increment, last position fastest
        std::size_t k = l;
        while (k > 0) {
            --k;
            if (static_cast<std::size_t>(++seq[k]) < v) break;
            seq[k] = 0;
            if (k == 0) return total;
        }
        if (l == 0) return total;
    }
}

/// Second formulation of the same quantity: memoized recursion over
/// (position, state), f(k, q) = sum_tok u(k, tok) f(k + 1, next(q, tok)).
inline double memoized_expected(const AlignedAutomaton& a, const Eigen::MatrixXd& u) {
    const auto l = static_cast<int>(u.rows());
    std::map<std::pair<int, StateId>, double> memo;
    std::function<double(int, StateId)> f = [&](int k, StateId q) -> double {
        if (k == l) return a.is_accepting(q) ? 1.0 : 0.0;
        auto key = std::pair(k, q);
        if (auto it = memo.find(key); it != memo.end()) return it->second;
        double s = 0.0;
        for (Eigen::Index tok = 0; tok < u.cols(); ++tok) {
            StateId t = a.next(q, static_cast<TokenId>(tok));
            if (t != kNoState) s += u(k, tok) * f(k + 1, t);
        }
        memo[key] = s;
        return s;
    };
    return f(0, a.start());
}

/// Central differences (f(x + h e) - f(x - h e)) / 2h for every entry of x.
inline Eigen::MatrixXd finite_difference(const std::function<double(const Eigen::MatrixXd&)>& f,
                                         const Eigen::MatrixXd& point, double h) {
    if (!(h > 0.0)) throw ValidationError("finite-difference step must be positive");
    Eigen::MatrixXd grad(point.rows(), point.cols());
    Eigen::MatrixXd x = point;
    for (Eigen::Index i = 0; i < point.rows(); ++i)
        for (Eigen::Index j = 0; j < point.cols(); ++j) {
            const double orig = x(i, j);
            x(i, j) = orig + h;
            const double up = f(x);
            x(i, j) = orig - h;
            const double down = f(x);
            x(i, j) = orig;
            if (!std::isfinite(up) || !std::isfinite(down))
                throw ValidationError("function is not finite in the finite-difference neighbourhood");
            grad(i, j) = (up - down) / (2.0 * h);
        }
    return grad;
}

/// Every accepted string of length <= max_len, in lexicographic order.
inline std::vector<std::string> enumerate_language(const Dfa& dfa, std::size_t max_len,
                                                   const EnumerationBudget& budget = {}) {
    std::vector<std::string> out;
    std::size_t visited = 0;
    std::string prefix;
    std::function<void(StateId)> walk = [&](StateId q) {
        if (++visited > budget.max_sequences) throw LimitError("enumeration budget exceeded");
        if (dfa.is_accepting(q)) out.push_back(prefix);
        if (prefix.size() == max_len) return;
        for (std::size_t sym = 0; sym < dfa.alphabet.size(); ++sym) {
            StateId t = dfa.next(q, sym);
            if (t == kNoState) continue;
            prefix.push_back(dfa.alphabet.at(sym));
            walk(t);
            prefix.pop_back();
        }
    };
    walk(dfa.start);
    std::sort(out.begin(), out.end());
    return out;
}

/// Direct AST interpretation: the set of end offsets reachable when matching
/// `ast` against `s` starting at `start`.
inline std::set<std::size_t> match_ends(const RegexAst& ast, std::string_view s, std::size_t start) {
    auto step_all = [&](const RegexAst& node, const std::set<std::size_t>& from) {
        std::set<std::size_t> out;
        for (auto p : from) {
            auto e = match_ends(node, s, p);
            out.insert(e.begin(), e.end());
        }
        return out;
    };
    auto closure = [&](const RegexAst& node, std::set<std::size_t> from) {
        std::set<std::size_t> all = from;
        std::set<std::size_t> frontier = std::move(from);
        while (!frontier.empty()) {
            std::set<std::size_t> next;
            for (auto p : step_all(node, frontier))
                if (all.insert(p).second) next.insert(p);
            frontier = std::move(next);
        }
        return all;
    };
    switch (ast.kind) {
        case RegexKind::Empty:
            return {start};
        case RegexKind::Literal:
        case RegexKind::Class:
        case RegexKind::Wildcard:
            if (start < s.size() && std::binary_search(ast.chars.begin(), ast.chars.end(), s[start]))
                return {start + 1};
            return {};
        case RegexKind::Group:
            return match_ends(ast.children.front(), s, start);
        case RegexKind::Concat: {
            std::set<std::size_t> cur{start};
            for (const auto& c : ast.children) cur = step_all(c, cur);
            return cur;
        }
        case RegexKind::Alternation: {
            std::set<std::size_t> out;
            for (const auto& c : ast.children) {
                auto e = match_ends(c, s, start);
                out.insert(e.begin(), e.end());
            }
            return out;
        }
        case RegexKind::Star:
            return closure(ast.children.front(), {start});
        case RegexKind::Plus:
            return closure(ast.children.front(), step_all(ast.children.front(), {start}));
        case RegexKind::Optional: {
            auto out = match_ends(ast.children.front(), s, start);
            out.insert(start);
            return out;
        }
        case RegexKind::Repeat: {
            std::set<std::size_t> cur{start};
            for (int i = 0; i < ast.min; ++i) cur = step_all(ast.children.front(), cur);
            if (ast.max == RegexAst::kUnbounded) return closure(ast.children.front(), cur);
            std::set<std::size_t> out = cur;
            for (int i = ast.min; i < ast.max; ++i) {
                cur = step_all(ast.children.front(), cur);
                out.insert(cur.begin(), cur.end());
            }
            return out;
        }
    }
    return {};
}

/// Whole-string match by AST interpretation.
inline bool ast_matches(const RegexAst& ast, std::string_view s) {
    return match_ends(ast, s, 0).count(s.size()) > 0;
}

}  // namespace rcdiff::oracle

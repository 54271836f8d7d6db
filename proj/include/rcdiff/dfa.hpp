#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rcdiff/alphabet.hpp"
#include "rcdiff/error.hpp"
#include "rcdiff/regex.hpp"

namespace rcdiff {

using StateId = int;
inline constexpr StateId kNoState = -1;

/// Character-level deterministic automaton with a partial transition table.
/// Transitions are stored densely as `num_states x |alphabet|`, with kNoState
/// for undefined moves.
struct Dfa {
    Alphabet alphabet;
    int num_states = 0;
    StateId start = 0;
    std::vector<bool> accepting;
    std::vector<StateId> table;

    Dfa() = default;
    Dfa(Alphabet sigma, int states, StateId start_state)
        : alphabet(std::move(sigma)),
          num_states(states),
          start(start_state),
          accepting(static_cast<std::size_t>(states), false),
          table(static_cast<std::size_t>(states) * alphabet.size(), kNoState) {}

    StateId next(StateId q, std::size_t symbol) const {
        return table[static_cast<std::size_t>(q) * alphabet.size() + symbol];
    }
    void set_next(StateId q, std::size_t symbol, StateId target) {
        table[static_cast<std::size_t>(q) * alphabet.size() + symbol] = target;
    }
    bool is_accepting(StateId q) const { return accepting[static_cast<std::size_t>(q)]; }

    std::size_t num_transitions() const {
        return static_cast<std::size_t>(
            std::count_if(table.begin(), table.end(), [](StateId s) { return s != kNoState; }));
    }

    std::vector<StateId> accepting_states() const {
        std::vector<StateId> out;
        for (int q = 0; q < num_states; ++q)
            if (accepting[static_cast<std::size_t>(q)]) out.push_back(q);
        return out;
    }

    /// Extended transition from `q` on `chars`; nullopt if some step is undefined.
    /// Characters outside the alphabet raise ValidationError.
    std::optional<StateId> run(StateId q, std::string_view chars) const {
        for (char c : chars) {
            q = next(q, alphabet.require_index(c));
            if (q == kNoState) return std::nullopt;
        }
        return q;
    }

    /// Checks the structural invariants; throws ValidationError.
    void validate() const {
        if (num_states <= 0) throw ValidationError("DFA must have at least one state");
        if (start < 0 || start >= num_states) throw ValidationError("DFA start state out of range");
        if (accepting.size() != static_cast<std::size_t>(num_states) ||
            table.size() != static_cast<std::size_t>(num_states) * alphabet.size())
            throw ValidationError("DFA tables have inconsistent sizes");
        for (StateId s : table)
            if (s != kNoState && (s < 0 || s >= num_states))
                throw ValidationError("DFA transition target out of range");
    }

    bool operator==(const Dfa&) const = default;
};

/// True iff the extended transition from the start state on `s` lands in an
/// accepting state. Throws ValidationError for characters outside the alphabet.
inline bool accepts(const Dfa& dfa, std::string_view s) {
    auto end = dfa.run(dfa.start, s);
    return end && dfa.is_accepting(*end);
}

struct CompileOptions {
    int state_cap = 10'000;
};

namespace detail {

// Thompson construction over alphabet indices.
class Nfa {
public:
    struct State {
        std::vector<std::pair<std::size_t, int>> moves;
        std::vector<int> epsilon;
    };
    struct Fragment {
        int in;
        int out;
    };

    explicit Nfa(const Alphabet& alphabet, std::size_t state_cap)
        : alphabet_(alphabet), state_cap_(state_cap) {}

    Fragment build(const RegexAst& ast) {
        switch (ast.kind) {
            case RegexKind::Empty: {
                int s = add();
                return {s, s};
            }
            case RegexKind::Literal:
            case RegexKind::Class:
            case RegexKind::Wildcard: {
                int a = add();
                int b = add();
                for (char c : ast.chars) states_[a].moves.emplace_back(alphabet_.require_index(c), b);
                return {a, b};
            }
            case RegexKind::Group:
                return build(ast.children.front());
            case RegexKind::Concat: {
                Fragment whole = build(ast.children.front());
                for (std::size_t i = 1; i < ast.children.size(); ++i) {
                    Fragment next = build(ast.children[i]);
                    link(whole.out, next.in);
                    whole.out = next.out;
                }
                return whole;
            }
            case RegexKind::Alternation: {
                int a = add();
                int b = add();
                for (const auto& option : ast.children) {
                    Fragment f = build(option);
                    link(a, f.in);
                    link(f.out, b);
                }
                return {a, b};
            }
            case RegexKind::Star:
                return star(ast.children.front());
            case RegexKind::Plus: {
                Fragment first = build(ast.children.front());
                Fragment rest = star(ast.children.front());
                link(first.out, rest.in);
                return {first.in, rest.out};
            }
            case RegexKind::Optional: {
                Fragment f = build(ast.children.front());
                int a = add();
                int b = add();
                link(a, f.in);
                link(f.out, b);
                link(a, b);
                return {a, b};
            }
            case RegexKind::Repeat:
                return repeat(ast.children.front(), ast.min, ast.max);
        }
        throw ValidationError("unknown regex node");
    }

    const std::vector<State>& states() const { return states_; }

    std::vector<int> closure(std::vector<int> seeds) const {
        std::vector<bool> seen(states_.size(), false);
        std::vector<int> stack;
        for (int s : seeds)
            if (!seen[static_cast<std::size_t>(s)]) {
                seen[static_cast<std::size_t>(s)] = true;
                stack.push_back(s);
            }
        std::vector<int> out;
        while (!stack.empty()) {
            int s = stack.back();
            stack.pop_back();
            out.push_back(s);
            for (int e : states_[static_cast<std::size_t>(s)].epsilon)
                if (!seen[static_cast<std::size_t>(e)]) {
                    seen[static_cast<std::size_t>(e)] = true;
                    stack.push_back(e);
                }
        }
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    int add() {
        if (states_.size() >= state_cap_)
            throw LimitError("regex expands to more than " + std::to_string(state_cap_) +
                             " automaton states");
        states_.emplace_back();
        return static_cast<int>(states_.size() - 1);
    }
    void link(int from, int to) { states_[static_cast<std::size_t>(from)].epsilon.push_back(to); }

    Fragment star(const RegexAst& child) {
        Fragment f = build(child);
        int a = add();
        int b = add();
        link(a, f.in);
        link(a, b);
        link(f.out, f.in);
        link(f.out, b);
        return {a, b};
    }

    Fragment repeat(const RegexAst& child, int min, int max) {
        int a = add();
        Fragment whole{a, a};
        for (int i = 0; i < min; ++i) {
            Fragment f = build(child);
            link(whole.out, f.in);
            whole.out = f.out;
        }
        if (max == RegexAst::kUnbounded) {
            Fragment f = star(child);
            link(whole.out, f.in);
            whole.out = f.out;
        } else {
            int b = add();
            for (int i = min; i < max; ++i) {
                link(whole.out, b);
                Fragment f = build(child);
                link(whole.out, f.in);
                whole.out = f.out;
            }
            link(whole.out, b);
            whole.out = b;
        }
        return whole;
    }

    const Alphabet& alphabet_;
    std::size_t state_cap_;
    std::vector<State> states_;
};

}  // namespace detail

/// Compiles an AST to a DFA via Thompson construction and subset construction.
/// States are numbered in breadth-first discovery order, symbols visited in
/// alphabet order. The result is not minimized.
inline Dfa compile(const RegexAst& ast, const Alphabet& alphabet, const CompileOptions& options = {}) {
    const auto cap = static_cast<std::size_t>(options.state_cap);
    // NFA states are bounded separately; Thompson graphs are linear in the
    // pattern size so a generous multiple of the DFA cap is enough.
    detail::Nfa nfa(alphabet, cap * 16 + 64);
    auto frag = nfa.build(ast);

    std::map<std::vector<int>, StateId> ids;
    std::vector<std::vector<int>> subsets;
    std::deque<StateId> queue;
    auto intern = [&](std::vector<int> set) -> StateId {
        auto [it, inserted] = ids.emplace(std::move(set), static_cast<StateId>(subsets.size()));
        if (inserted) {
            if (subsets.size() >= cap)
                throw LimitError("DFA exceeds the state cap of " + std::to_string(options.state_cap));
            subsets.push_back(it->first);
            queue.push_back(it->second);
        }
        return it->second;
    };

    intern(nfa.closure({frag.in}));
    std::vector<std::vector<StateId>> moves;
    const std::size_t sigma = alphabet.size();
    while (!queue.empty()) {
        StateId q = queue.front();
        queue.pop_front();
        std::vector<std::vector<int>> targets(sigma);
        for (int s : subsets[static_cast<std::size_t>(q)])
            for (auto [sym, t] : nfa.states()[static_cast<std::size_t>(s)].moves) targets[sym].push_back(t);
        if (moves.size() <= static_cast<std::size_t>(q)) moves.resize(static_cast<std::size_t>(q) + 1);
        moves[static_cast<std::size_t>(q)].assign(sigma, kNoState);
        for (std::size_t sym = 0; sym < sigma; ++sym) {
            if (targets[sym].empty()) continue;
            moves[static_cast<std::size_t>(q)][sym] = intern(nfa.closure(std::move(targets[sym])));
        }
    }

    Dfa dfa(alphabet, static_cast<int>(subsets.size()), 0);
    for (std::size_t q = 0; q < subsets.size(); ++q) {
        dfa.accepting[q] = std::binary_search(subsets[q].begin(), subsets[q].end(), frag.out);
        for (std::size_t sym = 0; sym < sigma; ++sym) dfa.set_next(static_cast<StateId>(q), sym, moves[q][sym]);
    }
    return dfa;
}

/// Parses and compiles in one step.
inline Dfa compile(std::string_view pattern, const Alphabet& alphabet, const CompileOptions& options = {}) {
    return compile(parse_regex(pattern, alphabet), alphabet, options);
}

/// Language-equivalent DFA with the minimal number of states (Moore partition
/// refinement). The dead state is elided, so the table stays partial; states
/// are renumbered breadth-first from the start state.
inline Dfa minimize(const Dfa& dfa) {
    const std::size_t sigma = dfa.alphabet.size();
    const int n = dfa.num_states;
    const int dead = n;  // explicit sink used only during refinement
    auto target = [&](int q, std::size_t sym) {
        if (q == dead) return dead;
        StateId t = dfa.next(q, sym);
        return t == kNoState ? dead : t;
    };

    std::vector<int> cls(static_cast<std::size_t>(n) + 1);
    for (int q = 0; q < n; ++q) cls[static_cast<std::size_t>(q)] = dfa.is_accepting(q) ? 1 : 0;
    cls[static_cast<std::size_t>(dead)] = 0;
    int num_classes = 0;
    while (true) {
        std::map<std::vector<int>, int> signature_ids;
        std::vector<int> refined(cls.size());
        for (int q = 0; q <= n; ++q) {
            std::vector<int> sig;
            sig.reserve(sigma + 1);
            sig.push_back(cls[static_cast<std::size_t>(q)]);
            for (std::size_t sym = 0; sym < sigma; ++sym)
                sig.push_back(cls[static_cast<std::size_t>(target(q, sym))]);
            auto [it, _] = signature_ids.emplace(std::move(sig), static_cast<int>(signature_ids.size()));
            refined[static_cast<std::size_t>(q)] = it->second;
        }
        int count = static_cast<int>(signature_ids.size());
        cls = std::move(refined);
        if (count == num_classes) break;
        num_classes = count;
    }

    const int dead_class = cls[static_cast<std::size_t>(dead)];
    const int start_class = cls[static_cast<std::size_t>(dfa.start)];
    if (start_class == dead_class) return Dfa(dfa.alphabet, 1, 0);  // empty language

    // Representative transitions per class, then BFS renumbering.
    std::vector<int> rep(static_cast<std::size_t>(num_classes), -1);
    for (int q = 0; q < n; ++q)
        if (rep[static_cast<std::size_t>(cls[static_cast<std::size_t>(q)])] < 0)
            rep[static_cast<std::size_t>(cls[static_cast<std::size_t>(q)])] = q;

    std::vector<int> order(static_cast<std::size_t>(num_classes), -1);
    std::vector<int> by_order;
    std::deque<int> queue{start_class};
    order[static_cast<std::size_t>(start_class)] = 0;
    by_order.push_back(start_class);
    while (!queue.empty()) {
        int c = queue.front();
        queue.pop_front();
        int q = rep[static_cast<std::size_t>(c)];
        for (std::size_t sym = 0; sym < sigma; ++sym) {
            int tc = cls[static_cast<std::size_t>(target(q, sym))];
            if (tc == dead_class || order[static_cast<std::size_t>(tc)] >= 0) continue;
            order[static_cast<std::size_t>(tc)] = static_cast<int>(by_order.size());
            by_order.push_back(tc);
            queue.push_back(tc);
        }
    }

    Dfa out(dfa.alphabet, static_cast<int>(by_order.size()), 0);
    for (std::size_t i = 0; i < by_order.size(); ++i) {
        int q = rep[static_cast<std::size_t>(by_order[i])];
        out.accepting[i] = dfa.is_accepting(q);
        for (std::size_t sym = 0; sym < sigma; ++sym) {
            int tc = cls[static_cast<std::size_t>(target(q, sym))];
            if (tc != dead_class) out.set_next(static_cast<StateId>(i), sym, order[static_cast<std::size_t>(tc)]);
        }
    }
    return out;
}

}  // namespace rcdiff

#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rcdiff/dfa.hpp"
#include "rcdiff/error.hpp"

namespace rcdiff {

using TokenId = int;

/// Ordered, duplicate-free token list. Token id is the list index.
class Vocabulary {
public:
    Vocabulary() = default;

    explicit Vocabulary(std::vector<std::string> tokens, std::optional<TokenId> pad = std::nullopt)
        : tokens_(std::move(tokens)), pad_(pad) {
        for (std::size_t i = 0; i < tokens_.size(); ++i) {
            if (tokens_[i].empty()) throw ValidationError("vocabulary tokens must be non-empty");
            if (!index_.emplace(tokens_[i], static_cast<TokenId>(i)).second)
                throw ValidationError("duplicate vocabulary token '" + tokens_[i] + "'");
        }
        if (pad_ && (*pad_ < 0 || *pad_ >= static_cast<TokenId>(tokens_.size())))
            throw ValidationError("pad token id out of range");
    }

    std::size_t size() const noexcept { return tokens_.size(); }
    const std::string& token(TokenId id) const { return tokens_.at(static_cast<std::size_t>(id)); }
    const std::vector<std::string>& tokens() const noexcept { return tokens_; }
    std::optional<TokenId> pad() const noexcept { return pad_; }

    std::optional<TokenId> find(std::string_view token) const {
        auto it = index_.find(std::string(token));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    /// Throws ValidationError unless every token character is in `alphabet`.
    void validate_over(const Alphabet& alphabet) const {
        for (const auto& tok : tokens_)
            for (char c : tok)
                if (!alphabet.contains(c))
                    throw ValidationError("token '" + tok + "' uses character '" + std::string(1, c) +
                                          "' outside the alphabet");
    }

    /// Concatenation of the tokens' text.
    std::string detokenize(std::span<const TokenId> ids) const {
        std::string out;
        for (TokenId id : ids) out += token(id);
        return out;
    }

    /// Greedy longest-match tokenization; throws if some position matches no token.
    std::vector<TokenId> tokenize(std::string_view text) const {
        std::size_t longest = 0;
        for (const auto& t : tokens_) longest = std::max(longest, t.size());
        std::vector<TokenId> out;
        std::size_t pos = 0;
        while (pos < text.size()) {
            std::optional<TokenId> hit;
            for (std::size_t len = std::min(longest, text.size() - pos); len > 0 && !hit; --len)
                hit = find(text.substr(pos, len));
            if (!hit)
                throw ValidationError("text cannot be tokenized at offset " + std::to_string(pos));
            out.push_back(*hit);
            pos += token(*hit).size();
        }
        return out;
    }

    bool operator==(const Vocabulary& other) const {
        return tokens_ == other.tokens_ && pad_ == other.pad_;
    }

private:
    std::vector<std::string> tokens_;
    std::optional<TokenId> pad_;
    std::unordered_map<std::string, TokenId> index_;
};

/// Tokens labelling every transition between one ordered pair of states.
struct TransitionGroup {
    StateId from = 0;
    StateId to = 0;
    std::vector<TokenId> tokens;

    bool operator==(const TransitionGroup&) const = default;
};

/// Token-level automaton over a vocabulary. Transitions are grouped per
/// (from, to) state pair, sorted by (from, to), token ids ascending.
class AlignedAutomaton {
public:
    AlignedAutomaton() = default;

    AlignedAutomaton(int num_states, StateId start, std::vector<bool> accepting,
                     std::vector<TransitionGroup> groups, Vocabulary vocab)
        : num_states_(num_states),
          start_(start),
          accepting_(std::move(accepting)),
          groups_(std::move(groups)),
          vocab_(std::move(vocab)) {
        if (num_states_ <= 0) throw ValidationError("aligned automaton needs at least one state");
        if (start_ < 0 || start_ >= num_states_) throw ValidationError("start state out of range");
        if (accepting_.size() != static_cast<std::size_t>(num_states_))
            throw ValidationError("accepting flags do not match the state count");
        std::sort(groups_.begin(), groups_.end(), [](const auto& a, const auto& b) {
            return std::pair(a.from, a.to) < std::pair(b.from, b.to);
        });
        next_.assign(static_cast<std::size_t>(num_states_) * vocab_.size(), kNoState);
        for (auto& g : groups_) {
            if (g.from < 0 || g.from >= num_states_ || g.to < 0 || g.to >= num_states_)
                throw ValidationError("transition endpoint out of range");
            std::sort(g.tokens.begin(), g.tokens.end());
            for (TokenId tok : g.tokens) {
                if (tok < 0 || static_cast<std::size_t>(tok) >= vocab_.size())
                    throw ValidationError("transition token id out of range");
                auto& slot = next_[index(g.from, tok)];
                if (slot != kNoState)
                    throw ValidationError("non-deterministic token transition from state " +
                                          std::to_string(g.from));
                slot = g.to;
            }
        }
    }

    int num_states() const noexcept { return num_states_; }
    StateId start() const noexcept { return start_; }
    bool is_accepting(StateId q) const { return accepting_[static_cast<std::size_t>(q)]; }
    const std::vector<bool>& accepting() const noexcept { return accepting_; }
    const std::vector<TransitionGroup>& groups() const noexcept { return groups_; }
    const Vocabulary& vocabulary() const noexcept { return vocab_; }

    /// Target of (q, tok), or kNoState.
    StateId next(StateId q, TokenId tok) const { return next_[index(q, tok)]; }

    std::size_t num_transitions() const {
        std::size_t n = 0;
        for (const auto& g : groups_) n += g.tokens.size();
        return n;
    }

    bool operator==(const AlignedAutomaton& o) const {
        return num_states_ == o.num_states_ && start_ == o.start_ && accepting_ == o.accepting_ &&
               groups_ == o.groups_ && vocab_ == o.vocab_;
    }

private:
    std::size_t index(StateId q, TokenId tok) const {
        return static_cast<std::size_t>(q) * vocab_.size() + static_cast<std::size_t>(tok);
    }

    int num_states_ = 0;
    StateId start_ = 0;
    std::vector<bool> accepting_;
    std::vector<TransitionGroup> groups_;
    Vocabulary vocab_;
    std::vector<StateId> next_;
};

/// Splits a token into its characters.
inline std::vector<char> charify(std::string_view token) { return {token.begin(), token.end()}; }

/// End state of the path consuming `chars` from `q`, or nullopt when some step
/// is undefined (or a character is outside the alphabet).
inline std::optional<StateId> traverse(std::span<const char> chars, StateId q, const Dfa& dfa) {
    for (char c : chars) {
        auto sym = dfa.alphabet.index_of(c);
        if (!sym) return std::nullopt;
        q = dfa.next(q, *sym);
        if (q == kNoState) return std::nullopt;
    }
    return q;
}

struct AlignOptions {
    std::size_t transition_cap = 10'000'000;
};

/// Lifts a character-level DFA to a token-level automaton over `vocab`.
///
/// For every token and every state, the token's characters are walked through
/// the DFA; a complete walk becomes a token transition. Only tokens of the
/// vocabulary ever label transitions, so single-character moves whose
/// character is not itself a token do not survive. States, start and
/// accepting set are those of the DFA.
inline AlignedAutomaton align(const Dfa& dfa, const Vocabulary& vocab, const AlignOptions& options = {}) {
    dfa.validate();
    vocab.validate_over(dfa.alphabet);
    std::map<std::pair<StateId, StateId>, std::vector<TokenId>> grouped;
    std::size_t count = 0;
    for (std::size_t id = 0; id < vocab.size(); ++id) {
        const auto chars = charify(vocab.token(static_cast<TokenId>(id)));
        for (StateId q = 0; q < dfa.num_states; ++q) {
            auto end = traverse(chars, q, dfa);
            if (!end) continue;
            if (++count > options.transition_cap)
                throw LimitError("aligned automaton exceeds the transition cap of " +
                                 std::to_string(options.transition_cap));
            grouped[{q, *end}].push_back(static_cast<TokenId>(id));
        }
    }
    std::vector<TransitionGroup> groups;
    groups.reserve(grouped.size());
    for (auto& [pair, toks] : grouped) groups.push_back({pair.first, pair.second, std::move(toks)});
    return AlignedAutomaton(dfa.num_states, dfa.start, dfa.accepting, std::move(groups), vocab);
}

/// True iff the token path from the start state ends in an accepting state.
/// Throws ValidationError for invalid token ids.
inline bool accepts_tokens(const AlignedAutomaton& a, std::span<const TokenId> tokens) {
    StateId q = a.start();
    for (TokenId tok : tokens) {
        if (tok < 0 || static_cast<std::size_t>(tok) >= a.vocabulary().size())
            throw ValidationError("token id " + std::to_string(tok) + " is not in the vocabulary");
        q = a.next(q, tok);
        if (q == kNoState) return false;
    }
    return a.is_accepting(q);
}

}  // namespace rcdiff

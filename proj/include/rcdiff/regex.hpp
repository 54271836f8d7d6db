#pragma once

// Regex subset used to state constraints. Matching is always anchored to
// the whole string.
//
//   alternation  := concat ('|' concat)*
//   concat       := repeat*
//   repeat       := atom ('*' | '+' | '?' | '{m}' | '{m,}' | '{m,n}')*
//   atom         := literal | '\' any | '.' | '[' class ']' | '(' alternation ')'
//
// Classes list members and ranges (`[a-cx]`); a range keeps only the members
// present in the alphabet, explicit members must be in it. Negated classes
// are not supported.

#include <algorithm>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "rcdiff/alphabet.hpp"
#include "rcdiff/error.hpp"

namespace rcdiff {

enum class RegexKind {
    Empty,        // matches only the empty string
    Literal,      // chars holds exactly one character
    Class,        // chars holds the sorted member set
    Wildcard,     // '.', chars holds the whole alphabet
    Concat,
    Alternation,
    Star,
    Plus,
    Optional,
    Repeat,       // {min,max}; max == kUnbounded for {m,}
    Group,
};

struct RegexAst {
    static constexpr int kUnbounded = -1;

    RegexKind kind = RegexKind::Empty;
    std::vector<char> chars;
    int min = 0;
    int max = 0;
    std::vector<RegexAst> children;

    static RegexAst empty() { return {}; }
    static RegexAst literal(char c) { return RegexAst{RegexKind::Literal, {c}, 0, 0, {}}; }
    static RegexAst char_class(std::vector<char> members) {
        std::sort(members.begin(), members.end());
        members.erase(std::unique(members.begin(), members.end()), members.end());
        return RegexAst{RegexKind::Class, std::move(members), 0, 0, {}};
    }
    static RegexAst wildcard(const Alphabet& alphabet) {
        std::vector<char> members(alphabet.chars().begin(), alphabet.chars().end());
        std::sort(members.begin(), members.end());
        return RegexAst{RegexKind::Wildcard, std::move(members), 0, 0, {}};
    }
    static RegexAst concat(std::vector<RegexAst> parts) {
        return RegexAst{RegexKind::Concat, {}, 0, 0, std::move(parts)};
    }
    static RegexAst alternation(std::vector<RegexAst> options) {
        return RegexAst{RegexKind::Alternation, {}, 0, 0, std::move(options)};
    }
    static RegexAst unary(RegexKind kind, RegexAst child) {
        return RegexAst{kind, {}, 0, 0, {std::move(child)}};
    }
    static RegexAst repeat(RegexAst child, int min, int max) {
        return RegexAst{RegexKind::Repeat, {}, min, max, {std::move(child)}};
    }
    static RegexAst group(RegexAst child) { return unary(RegexKind::Group, std::move(child)); }

    bool operator==(const RegexAst&) const = default;
};

/// True when the language of `ast` contains the empty string.
inline bool nullable(const RegexAst& ast) {
    switch (ast.kind) {
        case RegexKind::Empty:
        case RegexKind::Star:
        case RegexKind::Optional:
            return true;
        case RegexKind::Literal:
        case RegexKind::Class:
        case RegexKind::Wildcard:
            return false;
        case RegexKind::Concat:
            return std::all_of(ast.children.begin(), ast.children.end(),
                               [](const RegexAst& c) { return nullable(c); });
        case RegexKind::Alternation:
            return std::any_of(ast.children.begin(), ast.children.end(),
                               [](const RegexAst& c) { return nullable(c); });
        case RegexKind::Plus:
        case RegexKind::Group:
            return nullable(ast.children.front());
        case RegexKind::Repeat:
            return ast.min == 0 || nullable(ast.children.front());
    }
    return false;
}

namespace detail {

class RegexParser {
public:
    RegexParser(std::string_view pattern, const Alphabet& alphabet)
        : pattern_(pattern), alphabet_(alphabet) {}

    RegexAst parse() {
        RegexAst ast = parse_alternation();
        if (pos_ != pattern_.size()) {
            if (pattern_[pos_] == ')') fail("unbalanced ')'");
            fail(std::string("unexpected '") + pattern_[pos_] + "'");
        }
        return ast;
    }

private:
    static constexpr int kMaxRepeat = 1000;

    [[noreturn]] void fail(const std::string& what) const { throw SyntaxError(what, pos_); }
    [[noreturn]] void fail_at(const std::string& what, std::size_t pos) const {
        throw SyntaxError(what, pos);
    }

    bool at_end() const { return pos_ >= pattern_.size(); }
    char peek() const { return pattern_[pos_]; }

    char require_in_alphabet(char c, std::size_t where) const {
        if (!alphabet_.contains(c))
            fail_at(std::string("character '") + c + "' is outside the alphabet", where);
        return c;
    }

    RegexAst parse_alternation() {
        std::vector<RegexAst> options;
        options.push_back(parse_concat());
        while (!at_end() && peek() == '|') {
            ++pos_;
            options.push_back(parse_concat());
        }
        if (options.size() == 1) return std::move(options.front());
        return RegexAst::alternation(std::move(options));
    }

    RegexAst parse_concat() {
        std::vector<RegexAst> parts;
        while (!at_end() && peek() != '|' && peek() != ')') parts.push_back(parse_repeat());
        if (parts.empty()) return RegexAst::empty();
        if (parts.size() == 1) return std::move(parts.front());
        return RegexAst::concat(std::move(parts));
    }

    RegexAst parse_repeat() {
        RegexAst atom = parse_atom();
        while (!at_end()) {
            char c = peek();
            if (c == '*') {
                ++pos_;
                atom = RegexAst::unary(RegexKind::Star, std::move(atom));
            } else if (c == '+') {
                ++pos_;
                atom = RegexAst::unary(RegexKind::Plus, std::move(atom));
            } else if (c == '?') {
                ++pos_;
                atom = RegexAst::unary(RegexKind::Optional, std::move(atom));
            } else if (c == '{') {
                atom = parse_bounds(std::move(atom));
            } else {
                break;
            }
        }
        return atom;
    }

    int parse_number() {
        std::size_t start = pos_;
        long value = 0;
        while (!at_end() && peek() >= '0' && peek() <= '9') {
            value = value * 10 + (peek() - '0');
            if (value > kMaxRepeat) fail_at("repetition bound too large", start);
            ++pos_;
        }
        if (pos_ == start) fail("expected a number");
        return static_cast<int>(value);
    }

    RegexAst parse_bounds(RegexAst atom) {
        std::size_t open = pos_;
        ++pos_;  // '{'
        int min = parse_number();
        int max = min;
        if (!at_end() && peek() == ',') {
            ++pos_;
            if (!at_end() && peek() == '}')
                max = RegexAst::kUnbounded;
            else
                max = parse_number();
        }
        if (at_end() || peek() != '}') fail("expected '}'");
        ++pos_;
        if (max != RegexAst::kUnbounded && max < min) fail_at("repetition bounds out of order", open);
        return RegexAst::repeat(std::move(atom), min, max);
    }

    RegexAst parse_atom() {
        if (at_end()) fail("unexpected end of pattern");
        std::size_t where = pos_;
        char c = peek();
        switch (c) {
            case '(': {
                ++pos_;
                RegexAst inner = parse_alternation();
                if (at_end() || peek() != ')') fail_at("unbalanced '('", where);
                ++pos_;
                return RegexAst::group(std::move(inner));
            }
            case '[':
                return parse_class();
            case '.':
                ++pos_;
                return RegexAst::wildcard(alphabet_);
            case '\\': {
                ++pos_;
                if (at_end()) fail("dangling escape");
                char e = peek();
                ++pos_;
                return RegexAst::literal(require_in_alphabet(e, where));
            }
            case '*':
            case '+':
            case '?':
            case '{':
                fail(std::string("nothing to repeat before '") + c + "'");
            case ']':
            case '}':
                fail(std::string("unescaped '") + c + "'");
            default:
                ++pos_;
                return RegexAst::literal(require_in_alphabet(c, where));
        }
    }

    char class_char() {
        char c = peek();
        ++pos_;
        if (c == '\\') {
            if (at_end()) fail("dangling escape");
            c = peek();
            ++pos_;
        }
        return c;
    }

    RegexAst parse_class() {
        std::size_t open = pos_;
        ++pos_;  // '['
        if (!at_end() && peek() == '^') fail("negated classes are not supported");
        std::vector<char> members;
        bool first = true;
        while (true) {
            if (at_end()) fail_at("unterminated character class", open);
            if (peek() == ']' && !first) break;
            first = false;
            std::size_t lo_pos = pos_;
            char lo = class_char();
            bool is_range = pos_ + 1 < pattern_.size() && peek() == '-' && pattern_[pos_ + 1] != ']';
            if (is_range) {
                ++pos_;  // '-'
                char hi = class_char();
                if (static_cast<unsigned char>(hi) < static_cast<unsigned char>(lo))
                    fail_at("character range out of order", lo_pos);
                for (int x = static_cast<unsigned char>(lo); x <= static_cast<unsigned char>(hi); ++x)
                    if (alphabet_.contains(static_cast<char>(x))) members.push_back(static_cast<char>(x));
            } else {
                members.push_back(require_in_alphabet(lo, lo_pos));
            }
        }
        ++pos_;  // ']'
        if (members.empty()) fail_at("character class matches nothing in the alphabet", open);
        return RegexAst::char_class(std::move(members));
    }

    std::string_view pattern_;
    const Alphabet& alphabet_;
    std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses `pattern` into an AST whose characters all lie in `alphabet`.
/// Throws SyntaxError (with byte offset) on malformed input or characters
/// outside the alphabet.
inline RegexAst parse_regex(std::string_view pattern, const Alphabet& alphabet) {
    return detail::RegexParser(pattern, alphabet).parse();
}

/// Escapes regex metacharacters so `text` matches literally.
inline std::string escape_regex(std::string_view text) {
    static constexpr std::string_view kMeta = "\\.[](){}|*+?^$-";
    std::string out;
    for (char c : text) {
        if (kMeta.find(c) != std::string_view::npos) out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

}  // namespace rcdiff

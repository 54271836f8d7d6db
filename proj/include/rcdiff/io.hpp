#pragma once

// Text formats for automata, vocabularies and unigram matrices.
//
// DFA, aligned automaton and unigram matrix documents are JSON objects with a
// "format" tag and a "version"; writers emit a canonical layout so that
// write(read(text)) reproduces `text` byte for byte. Vocabulary files hold one
// escaped token per line.

#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "rcdiff/acceptance.hpp"
#include "rcdiff/alignment.hpp"
#include "rcdiff/dfa.hpp"
#include "rcdiff/error.hpp"

namespace rcdiff::io {

using nlohmann::json;

inline constexpr int kFormatVersion = 1;

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot open '" + path + "' for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw ValidationError("failed writing '" + path + "'");
}

namespace detail {

inline json parse_document(std::string_view text, std::string_view format) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("malformed ") + std::string(format) + " document: " + e.what());
    }
    if (!doc.is_object() || doc.value("format", "") != format)
        throw ValidationError("document is not a " + std::string(format) + " file");
    if (doc.value("version", 0) != kFormatVersion)
        throw ValidationError("unsupported " + std::string(format) + " version");
    return doc;
}

template <typename T>
T field(const json& doc, const char* key) {
    try {
        return doc.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("bad or missing field '") + key + "': " + e.what());
    }
}

inline std::string dump(const json& doc) { return doc.dump(1) + "\n"; }

}  // namespace detail

// ---- DFA -------------------------------------------------------------------

inline std::string dfa_to_text(const Dfa& dfa) {
    json transitions = json::array();
    for (StateId q = 0; q < dfa.num_states; ++q)
        for (std::size_t sym = 0; sym < dfa.alphabet.size(); ++sym)
            if (StateId t = dfa.next(q, sym); t != kNoState)
                transitions.push_back(json::array({q, std::string(1, dfa.alphabet.at(sym)), t}));
    json doc = {{"format", "rcdiff.dfa"},
                {"version", kFormatVersion},
                {"alphabet", dfa.alphabet.chars()},
                {"states", dfa.num_states},
                {"start", dfa.start},
                {"accepting", dfa.accepting_states()},
                {"transitions", transitions}};
    return detail::dump(doc);
}

inline Dfa dfa_from_text(std::string_view text) {
    json doc = detail::parse_document(text, "rcdiff.dfa");
    Dfa dfa(Alphabet(detail::field<std::string>(doc, "alphabet")), detail::field<int>(doc, "states"),
            detail::field<int>(doc, "start"));
    if (dfa.num_states <= 0) throw ValidationError("DFA must have at least one state");
    for (int q : detail::field<std::vector<int>>(doc, "accepting")) {
        if (q < 0 || q >= dfa.num_states) throw ValidationError("accepting state out of range");
        dfa.accepting[static_cast<std::size_t>(q)] = true;
    }
    for (const auto& t : detail::field<json>(doc, "transitions")) {
        if (!t.is_array() || t.size() != 3) throw ValidationError("transition must be [from, char, to]");
        auto from = t[0].get<int>();
        auto label = t[1].get<std::string>();
        auto to = t[2].get<int>();
        if (label.size() != 1) throw ValidationError("transition label must be one character");
        if (from < 0 || from >= dfa.num_states || to < 0 || to >= dfa.num_states)
            throw ValidationError("transition endpoint out of range");
        auto sym = dfa.alphabet.require_index(label[0]);
        if (dfa.next(from, sym) != kNoState) throw ValidationError("duplicate DFA transition");
        dfa.set_next(from, sym, to);
    }
    dfa.validate();
    return dfa;
}

// ---- Vocabulary ------------------------------------------------------------
//
// One token per line. Backslash, newline, tab, carriage return and space are
// written as \\, \n, \t, \r and \s. An optional first line "\pad <id>"
// designates the pad token.

inline std::string escape_token(std::string_view token) {
    std::string out;
    for (char c : token) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            case ' ': out += "\\s"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

inline std::string unescape_token(std::string_view line) {
    std::string out;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] != '\\') {
            out.push_back(line[i]);
            continue;
        }
        if (++i == line.size()) throw ValidationError("dangling escape in vocabulary line");
        switch (line[i]) {
            case '\\': out.push_back('\\'); break;
            case 'n': out.push_back('\n'); break;
            case 't': out.push_back('\t'); break;
            case 'r': out.push_back('\r'); break;
            case 's': out.push_back(' '); break;
            default: throw ValidationError(std::string("unknown escape \\") + line[i] + " in vocabulary");
        }
    }
    return out;
}

inline std::string vocabulary_to_text(const Vocabulary& vocab) {
    std::string out;
    if (vocab.pad()) out += "\\pad " + std::to_string(*vocab.pad()) + "\n";
    for (const auto& tok : vocab.tokens()) out += escape_token(tok) + "\n";
    return out;
}

inline Vocabulary vocabulary_from_text(std::string_view text) {
    std::vector<std::string> tokens;
    std::optional<TokenId> pad;
    std::size_t pos = 0;
    bool first = true;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        if (first && line.starts_with("\\pad ")) {
            try {
                pad = std::stoi(std::string(line.substr(5)));
            } catch (const std::exception&) {
                throw ValidationError("malformed \\pad directive");
            }
        } else {
            if (line.empty()) throw ValidationError("empty vocabulary line");
            tokens.push_back(unescape_token(line));
        }
        first = false;
    }
    return Vocabulary(std::move(tokens), pad);
}

// ---- Aligned automaton -----------------------------------------------------

inline std::string aligned_to_text(const AlignedAutomaton& a) {
    json transitions = json::array();
    for (const auto& g : a.groups())
        for (TokenId tok : g.tokens) transitions.push_back(json::array({g.from, tok, g.to}));
    std::vector<int> finals;
    for (int q = 0; q < a.num_states(); ++q)
        if (a.is_accepting(q)) finals.push_back(q);
    json doc = {{"format", "rcdiff.aligned"},
                {"version", kFormatVersion},
                {"vocabulary", a.vocabulary().tokens()},
                {"pad", a.vocabulary().pad() ? json(*a.vocabulary().pad()) : json(nullptr)},
                {"states", a.num_states()},
                {"start", a.start()},
                {"accepting", finals},
                {"transitions", transitions}};
    return detail::dump(doc);
}

inline AlignedAutomaton aligned_from_text(std::string_view text) {
    json doc = detail::parse_document(text, "rcdiff.aligned");
    std::optional<TokenId> pad;
    if (doc.contains("pad") && !doc["pad"].is_null()) pad = detail::field<int>(doc, "pad");
    Vocabulary vocab(detail::field<std::vector<std::string>>(doc, "vocabulary"), pad);
    const int states = detail::field<int>(doc, "states");
    if (states <= 0) throw ValidationError("aligned automaton must have at least one state");
    std::vector<bool> accepting(static_cast<std::size_t>(states), false);
    for (int q : detail::field<std::vector<int>>(doc, "accepting")) {
        if (q < 0 || q >= states) throw ValidationError("accepting state out of range");
        accepting[static_cast<std::size_t>(q)] = true;
    }
    std::map<std::pair<StateId, StateId>, std::vector<TokenId>> grouped;
    for (const auto& t : detail::field<json>(doc, "transitions")) {
        if (!t.is_array() || t.size() != 3) throw ValidationError("transition must be [from, token, to]");
        grouped[{t[0].get<int>(), t[2].get<int>()}].push_back(t[1].get<int>());
    }
    std::vector<TransitionGroup> groups;
    for (auto& [pair, toks] : grouped) groups.push_back({pair.first, pair.second, std::move(toks)});
    return AlignedAutomaton(states, detail::field<int>(doc, "start"), std::move(accepting), std::move(groups),
                            std::move(vocab));
}

// ---- Unigram matrix --------------------------------------------------------

inline std::string unigram_to_text(const UnigramMatrix& u) {
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(u.size()));
    for (Eigen::Index k = 0; k < u.rows(); ++k)
        for (Eigen::Index j = 0; j < u.cols(); ++j) data.push_back(u(k, j));
    json doc = {{"format", "rcdiff.unigram"},
                {"version", kFormatVersion},
                {"rows", u.rows()},
                {"cols", u.cols()},
                {"data", data}};
    return detail::dump(doc);
}

/// Parses and validates (row-stochastic within 1e-9).
inline UnigramMatrix unigram_from_text(std::string_view text) {
    json doc = detail::parse_document(text, "rcdiff.unigram");
    auto rows = detail::field<long>(doc, "rows");
    auto cols = detail::field<long>(doc, "cols");
    auto data = detail::field<std::vector<double>>(doc, "data");
    if (rows < 0 || cols <= 0 || static_cast<std::size_t>(rows * cols) != data.size())
        throw ValidationError("unigram data length does not match rows x cols");
    UnigramMatrix u(rows, cols);
    for (long k = 0; k < rows; ++k)
        for (long j = 0; j < cols; ++j) u(k, j) = data[static_cast<std::size_t>(k * cols + j)];
    validate_unigram(u);
    return u;
}

}  // namespace rcdiff::io

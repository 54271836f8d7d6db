#pragma once

// Natural-language regex benchmark templates and their evaluation.
//
// A word is a maximal run of letters; words are separated by exactly one
// space. Template regexes match a whole sentence. For fixed-length
// generation the sentence is followed by pad characters, so the guided form
// of a template is "(raw)_*" (with the model's pad character). Free-standing
// patterns use pad(), which wraps them in ".*( ... ).*".

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <iomanip>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "rcdiff/alignment.hpp"
#include "rcdiff/dfa.hpp"
#include "rcdiff/diffusion.hpp"
#include "rcdiff/error.hpp"
#include "rcdiff/regex.hpp"

namespace rcdiff::bench {

enum class TemplateKind { Prefix, Suffix, Appearance, BetweenN, BetweenUnbounded, WordLength };

inline constexpr TemplateKind kAllKinds[] = {TemplateKind::Prefix,   TemplateKind::Suffix,
                                             TemplateKind::Appearance, TemplateKind::BetweenN,
                                             TemplateKind::BetweenUnbounded, TemplateKind::WordLength};

inline std::string to_string(TemplateKind k) {
    switch (k) {
        case TemplateKind::Prefix: return "prefix";
        case TemplateKind::Suffix: return "suffix";
        case TemplateKind::Appearance: return "appearance";
        case TemplateKind::BetweenN: return "between_n";
        case TemplateKind::BetweenUnbounded: return "between_unbounded";
        case TemplateKind::WordLength: return "word_length";
    }
    return "?";
}

inline TemplateKind kind_from_string(std::string_view s) {
    for (auto k : kAllKinds)
        if (to_string(k) == s) return k;
    throw ValidationError("unknown template kind '" + std::string(s) + "'");
}

/// ".*(" + raw + ").*"
inline std::string pad(std::string_view raw) { return ".*(" + std::string(raw) + ").*"; }

/// Regex builder. A word wildcard is either a run of letters from a class
/// such as "a-z", or one word of a fixed lexicon.
class TemplateSet {
public:
    static TemplateSet letters(std::string letter_class = "a-z") {
        if (letter_class.empty()) throw ValidationError("letter class must be non-empty");
        TemplateSet ts;
        ts.letters_ = std::move(letter_class);
        return ts;
    }

    static TemplateSet lexicon(std::vector<std::string> words) {
        if (words.empty()) throw ValidationError("lexicon must be non-empty");
        for (const auto& w : words) check_word(w);
        std::sort(words.begin(), words.end());
        words.erase(std::unique(words.begin(), words.end()), words.end());
        TemplateSet ts;
        ts.lexicon_ = std::move(words);
        return ts;
    }

    bool uses_lexicon() const noexcept { return !lexicon_.empty(); }
    const std::vector<std::string>& lexicon_words() const noexcept { return lexicon_; }

    /// The n-th word from the start is `w` (1 <= n <= 5).
    std::string prefix(std::string_view w, int n) const {
        check_member(w);
        check_range(n, 1, 5, "prefix position");
        return lead(n - 1) + escape_regex(w) + "( " + word() + ")*";
    }

    /// The n-th word from the end is `w` (1 <= n <= 3).
    std::string suffix(std::string_view w, int n) const {
        check_member(w);
        check_range(n, 1, 3, "suffix position");
        return "(" + word() + " )*" + escape_regex(w) + trail(n - 1);
    }

    /// Both words occur, in either order.
    std::string appearance(std::string_view w1, std::string_view w2) const {
        check_member(w1);
        check_member(w2);
        const std::string a = escape_regex(w1), b = escape_regex(w2), gap = " (" + word() + " )*";
        return "(" + word() + " )*(" + a + gap + b + "|" + b + gap + a + ")( " + word() + ")*";
    }

    /// w1 followed by exactly n words and then w2 (1 <= n <= 3).
    std::string between_n(std::string_view w1, std::string_view w2, int n) const {
        check_member(w1);
        check_member(w2);
        check_range(n, 1, 3, "between count");
        return "(" + word() + " )*" + escape_regex(w1) + trail(n) + " " + escape_regex(w2) + "( " + word() + ")*";
    }

    /// w1 followed, after any number of words, by w2.
    std::string between_unbounded(std::string_view w1, std::string_view w2) const {
        check_member(w1);
        check_member(w2);
        return "(" + word() + " )*" + escape_regex(w1) + "( " + word() + ")* " + escape_regex(w2) + "( " + word() +
               ")*";
    }

    /// Some word has exactly n letters (1 <= n <= 10).
    std::string word_length(int n) const {
        check_range(n, 1, 10, "word length");
        return "(" + word() + " )*" + word_of_length(n) + "( " + word() + ")*";
    }

private:
    TemplateSet() = default;

    std::string word() const {
        if (!uses_lexicon()) return "[" + letters_ + "]+";
        return alternation(lexicon_);
    }
    std::string word_of_length(int n) const {
        if (!uses_lexicon()) return "[" + letters_ + "]{" + std::to_string(n) + "}";
        std::vector<std::string> fit;
        for (const auto& w : lexicon_)
            if (static_cast<int>(w.size()) == n) fit.push_back(w);
        if (fit.empty()) throw ValidationError("no lexicon word has " + std::to_string(n) + " letters");
        return alternation(fit);
    }
    static std::string alternation(const std::vector<std::string>& words) {
        std::string out = "(";
        for (std::size_t i = 0; i < words.size(); ++i) out += (i ? "|" : "") + escape_regex(words[i]);
        return out + ")";
    }
    std::string lead(int count) const {
        return count == 0 ? "" : "(" + word() + " ){" + std::to_string(count) + "}";
    }
    std::string trail(int count) const {
        return count == 0 ? "" : "( " + word() + "){" + std::to_string(count) + "}";
    }
    static void check_word(std::string_view w) {
        if (w.empty()) throw ValidationError("template word must be non-empty");
        for (char c : w)
            if (c == ' ') throw ValidationError("template word must not contain spaces");
    }
    void check_member(std::string_view w) const {
        check_word(w);
        if (uses_lexicon() && !std::binary_search(lexicon_.begin(), lexicon_.end(), std::string(w)))
            throw ValidationError("word '" + std::string(w) + "' is not in the lexicon");
    }
    static void check_range(int n, int lo, int hi, const char* what) {
        if (n < lo || n > hi)
            throw ValidationError(std::string(what) + " must lie in [" + std::to_string(lo) + ", " +
                                  std::to_string(hi) + "]");
    }

    std::string letters_;
    std::vector<std::string> lexicon_;
};

/// Three JSON-shaped patterns: fixed keys, an enum value, a free string value.
inline std::vector<std::string> json_patterns() {
    return {
        R"re(\{"name": "[a-z]+", "age": [0-9]+\})re",
        R"re(\{"color": "(red|green|blue)"\})re",
        R"re(\{"id": "[a-z0-9 ]*"\})re",
    };
}

struct BenchmarkCase {
    TemplateKind kind = TemplateKind::Prefix;
    std::vector<std::string> words;
    int n = 0;  // position, count or length; 0 when unused
    std::uint64_t seed = 0;
    std::string raw;
    std::string padded;

    bool operator==(const BenchmarkCase&) const = default;
};

/// Fills in raw and padded regexes from (kind, words, n).
inline BenchmarkCase make_case(TemplateKind kind, std::vector<std::string> words, int n, std::uint64_t seed,
                               const TemplateSet& ts, char pad_char) {
    BenchmarkCase c{kind, std::move(words), n, seed, "", ""};
    auto need = [&](std::size_t count) {
        if (c.words.size() != count)
            throw ValidationError(to_string(kind) + " needs " + std::to_string(count) + " word(s)");
    };
    switch (kind) {
        case TemplateKind::Prefix: need(1); c.raw = ts.prefix(c.words[0], n); break;
        case TemplateKind::Suffix: need(1); c.raw = ts.suffix(c.words[0], n); break;
        case TemplateKind::Appearance: need(2); c.raw = ts.appearance(c.words[0], c.words[1]); c.n = 0; break;
        case TemplateKind::BetweenN: need(2); c.raw = ts.between_n(c.words[0], c.words[1], n); break;
        case TemplateKind::BetweenUnbounded:
            need(2);
            c.raw = ts.between_unbounded(c.words[0], c.words[1]);
            c.n = 0;
            break;
        case TemplateKind::WordLength: need(0); c.raw = ts.word_length(n); break;
    }
    c.padded = "(" + c.raw + ")" + escape_regex(std::string(1, pad_char)) + "*";
    return c;
}

namespace detail {

inline std::vector<std::string> split_words(std::string_view s) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        auto end = s.find(' ', pos);
        if (end == std::string_view::npos) end = s.size();
        if (end > pos) out.emplace_back(s.substr(pos, end - pos));
        pos = end + 1;
    }
    return out;
}

}  // namespace detail

/// `per_kind` cases of every template. Parameters are read off randomly
/// chosen corpus sentences, so each case is satisfied by at least one
/// training sentence.
inline std::vector<BenchmarkCase> generate_suite(const std::vector<std::string>& sentences, int per_kind,
                                                 std::uint64_t seed, const TemplateSet& ts, char pad_char) {
    if (sentences.empty()) throw ValidationError("suite generation needs at least one sentence");
    std::mt19937_64 rng(seed);
    auto uniform = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
    std::vector<BenchmarkCase> suite;
    for (auto kind : kAllKinds) {
        for (int made = 0, attempts = 0; made < per_kind;) {
            if (++attempts > 100000) throw LimitError("cannot find enough distinct " + to_string(kind) + " cases");
            auto words = detail::split_words(sentences[uniform(0, sentences.size() - 1)]);
            const std::size_t m = words.size();
            if (m == 0) continue;
            const std::uint64_t case_seed = rng();
            std::optional<BenchmarkCase> c;
            switch (kind) {
                case TemplateKind::Prefix: {
                    const auto n = uniform(1, std::min<std::size_t>(5, m));
                    c = make_case(kind, {words[n - 1]}, static_cast<int>(n), case_seed, ts, pad_char);
                    break;
                }
                case TemplateKind::Suffix: {
                    const auto n = uniform(1, std::min<std::size_t>(3, m));
                    c = make_case(kind, {words[m - n]}, static_cast<int>(n), case_seed, ts, pad_char);
                    break;
                }
                case TemplateKind::Appearance:
                case TemplateKind::BetweenUnbounded: {
                    if (m < 2) break;
                    auto i = uniform(0, m - 2), j = uniform(i + 1, m - 1);
                    if (words[i] == words[j]) break;
                    c = make_case(kind, {words[i], words[j]}, 0, case_seed, ts, pad_char);
                    break;
                }
                case TemplateKind::BetweenN: {
                    if (m < 3) break;
                    const auto n = uniform(1, std::min<std::size_t>(3, m - 2));
                    const auto i = uniform(0, m - n - 2);
                    if (words[i] == words[i + n + 1]) break;
                    c = make_case(kind, {words[i], words[i + n + 1]}, static_cast<int>(n), case_seed, ts, pad_char);
                    break;
                }
                case TemplateKind::WordLength: {
                    const auto& w = words[uniform(0, m - 1)];
                    if (w.size() > 10) break;
                    c = make_case(kind, {}, static_cast<int>(w.size()), case_seed, ts, pad_char);
                    break;
                }
            }
            if (!c) continue;
            const bool repeat = std::any_of(suite.begin(), suite.end(), [&](const BenchmarkCase& o) {
                return o.kind == c->kind && o.words == c->words && o.n == c->n;
            });
            if (repeat) continue;
            suite.push_back(std::move(*c));
            ++made;
        }
    }
    return suite;
}

// ---- suite file ------------------------------------------------------------

inline std::string suite_to_text(const std::vector<BenchmarkCase>& suite) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : suite)
        arr.push_back({{"kind", to_string(c.kind)},
                       {"params", {{"words", c.words}, {"n", c.n}}},
                       {"seed", c.seed}});
    return arr.dump(1) + "\n";
}

inline std::vector<BenchmarkCase> suite_from_text(std::string_view text, const TemplateSet& ts, char pad_char) {
    nlohmann::json arr;
    try {
        arr = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("malformed suite file: ") + e.what());
    }
    if (!arr.is_array()) throw ValidationError("suite file must hold a list of cases");
    std::vector<BenchmarkCase> suite;
    for (const auto& item : arr) {
        try {
            suite.push_back(make_case(kind_from_string(item.at("kind").get<std::string>()),
                                      item.at("params").at("words").get<std::vector<std::string>>(),
                                      item.at("params").value("n", 0), item.at("seed").get<std::uint64_t>(), ts,
                                      pad_char));
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(std::string("bad suite entry: ") + e.what());
        }
    }
    return suite;
}

// ---- evaluation ------------------------------------------------------------

struct CaseResult {
    std::size_t case_id = 0;
    TemplateKind kind = TemplateKind::Prefix;
    double gamma = 0.0;
    int samples = 0;
    int satisfied = 0;
    double rate = 0.0;
    int k = 0;
    int pass_at_k = 0;
    std::optional<double> wall_ms;
};

struct EvalReport {
    std::vector<CaseResult> rows;  // ordered by (case_id, gamma index)
};

/// Rate and pass@k from per-sample outcomes in draw order.
inline CaseResult aggregate(const std::vector<bool>& outcomes, int k) {
    if (k < 0 || static_cast<std::size_t>(k) > outcomes.size())
        throw ValidationError("k must not exceed the number of samples");
    CaseResult r;
    r.samples = static_cast<int>(outcomes.size());
    r.satisfied = static_cast<int>(std::count(outcomes.begin(), outcomes.end(), true));
    r.rate = outcomes.empty() ? 0.0 : static_cast<double>(r.satisfied) / static_cast<double>(outcomes.size());
    r.k = k;
    r.pass_at_k = std::any_of(outcomes.begin(), outcomes.begin() + k, [](bool b) { return b; }) ? 1 : 0;
    return r;
}

/// Whether the raw template accepts `text` once trailing pad characters are removed.
inline bool satisfied(const Dfa& raw_dfa, std::string_view text, char pad_char) {
    auto end = text.find_last_not_of(pad_char);
    std::string_view body = end == std::string_view::npos ? std::string_view{} : text.substr(0, end + 1);
    for (char c : body)
        if (!raw_dfa.alphabet.contains(c)) return false;
    return accepts(raw_dfa, body);
}

struct EvalOptions {
    std::vector<double> gammas{0.0, 1.0, 2.5};
    int samples = 200;
    int k = 10;
    int steps = 0;  // 0 means the model's T
    std::uint64_t seed = 0;
    GuidanceConfig guidance{};
    bool timing = false;
};

/// Sample i of case c uses seed + c * samples + i for every gamma, so the
/// runs at different scales share their noise.
inline EvalReport evaluate(const DiffusionModel& model, const std::vector<BenchmarkCase>& cases,
                           const Alphabet& alphabet, const EvalOptions& opts) {
    if (opts.samples < opts.k || opts.k < 0) throw ValidationError("samples per case must be at least k");
    const auto& vocab = model.vocabulary();
    if (!vocab.pad()) throw ValidationError("benchmark evaluation needs a pad token");
    const std::string& pad_token = vocab.token(*vocab.pad());
    if (pad_token.size() != 1) throw ValidationError("pad token must be a single character");
    const int steps = opts.steps > 0 ? opts.steps : model.config().timesteps;

    EvalReport report;
    for (std::size_t ci = 0; ci < cases.size(); ++ci) {
        const auto& c = cases[ci];
        const Dfa raw = minimize(compile(c.raw, alphabet));
        const AlignedAutomaton guided = align(minimize(compile(c.padded, alphabet)), vocab);
        for (double gamma : opts.gammas) {
            GuidanceConfig g = opts.guidance;
            g.scale = gamma;
            const auto start = std::chrono::steady_clock::now();
            std::vector<bool> outcomes;
            for (int i = 0; i < opts.samples; ++i) {
                const std::uint64_t s = opts.seed + ci * static_cast<std::uint64_t>(opts.samples) + static_cast<std::uint64_t>(i);
                auto result = sample(model, gamma > 0.0 ? &guided : nullptr, g, steps, s);
                outcomes.push_back(satisfied(raw, result.text, pad_token[0]));
            }
            CaseResult r = aggregate(outcomes, opts.k);
            r.case_id = ci;
            r.kind = c.kind;
            r.gamma = gamma;
            if (opts.timing)
                r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
            report.rows.push_back(r);
        }
    }
    return report;
}

/// Mean rate over rows with this gamma, optionally restricted to some kinds.
inline double mean_rate(const EvalReport& report, double gamma, const std::vector<TemplateKind>& kinds = {}) {
    double sum = 0.0;
    int n = 0;
    for (const auto& r : report.rows) {
        if (r.gamma != gamma) continue;
        if (!kinds.empty() && std::find(kinds.begin(), kinds.end(), r.kind) == kinds.end()) continue;
        sum += r.rate;
        ++n;
    }
    return n ? sum / n : 0.0;
}

namespace detail {

inline std::string format_number(double v) {
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

}  // namespace detail

inline std::string report_to_csv(const EvalReport& report) {
    std::string out = "case_id,kind,gamma,samples,satisfied,rate,pass_at_k,wall_ms\n";
    for (const auto& r : report.rows) {
        out += std::to_string(r.case_id) + "," + to_string(r.kind) + "," + detail::format_number(r.gamma) + "," +
               std::to_string(r.samples) + "," + std::to_string(r.satisfied) + "," + detail::format_number(r.rate) +
               "," + std::to_string(r.pass_at_k) + "," + (r.wall_ms ? detail::format_number(*r.wall_ms) : "NA") +
               "\n";
    }
    return out;
}

/// `run` is copied verbatim under the "run" key when it is not null.
inline std::string report_to_json(const EvalReport& report, const nlohmann::json& run = nullptr) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : report.rows)
        rows.push_back({{"case_id", r.case_id},
                        {"kind", to_string(r.kind)},
                        {"gamma", r.gamma},
                        {"samples", r.samples},
                        {"satisfied", r.satisfied},
                        {"rate", r.rate},
                        {"k", r.k},
                        {"pass_at_k", r.pass_at_k},
                        {"wall_ms", r.wall_ms ? nlohmann::json(*r.wall_ms) : nlohmann::json(nullptr)}});
    nlohmann::json doc{{"format", "rcdiff.report"}, {"version", 1}};
    if (!run.is_null()) doc["run"] = run;
    doc["rows"] = std::move(rows);
    return doc.dump(1) + "\n";
}

}  // namespace rcdiff::bench

// rcdiff: command-line front end.
//
//   rcdiff compile     --regex R --alphabet A --out dfa.json
//   rcdiff align       --dfa dfa.json --vocab vocab.txt --out aligned.json
//   rcdiff score       --aligned aligned.json --unigram u.json
//   rcdiff gradcheck   --seed S --cases N
//   rcdiff make-corpus --sentences N --seed S --out corpus.txt [--vocab-out vocab.txt]
//   rcdiff train       --corpus corpus.txt --vocab vocab.txt --seq-len L --out model.ckpt
//   rcdiff make-suite  --corpus corpus.txt --vocab vocab.txt --out suite.json
//   rcdiff sample      --checkpoint model.ckpt [--regex R] --gamma G --samples N --out samples.jsonl
//   rcdiff bench       --checkpoint model.ckpt --suite suite.json --out report
//
// Exit status: 0 success, 1 usage error, 2 validation or limit error,
// 3 verification failure.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rcdiff/acceptance.hpp"
#include "rcdiff/alignment.hpp"
#include "rcdiff/benchgen.hpp"
#include "rcdiff/checkpoint.hpp"
#include "rcdiff/dfa.hpp"
#include "rcdiff/diffusion.hpp"
#include "rcdiff/io.hpp"
#include "rcdiff/toy_corpus.hpp"
#include "rcdiff/training.hpp"

namespace {

using nlohmann::json;
using namespace rcdiff;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitVerification = 3;

// Output goes to --out when given, otherwise to stdout.
void emit(const std::string& out, const std::string& text) {
    if (out.empty())
        std::cout << text;
    else
        io::write_file(out, text);
}

std::vector<std::string> read_lines(const std::string& path) {
    std::istringstream in(io::read_file(path));
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);)
        if (!line.empty()) lines.push_back(line);
    return lines;
}

// Every character that occurs in some token, in byte order.
Alphabet vocabulary_alphabet(const Vocabulary& vocab) {
    std::set<char> chars;
    for (const auto& t : vocab.tokens()) chars.insert(t.begin(), t.end());
    return Alphabet(std::string(chars.begin(), chars.end()));
}

bench::TemplateSet template_set(const std::string& wildcard, const std::string& letter_class,
                                const Vocabulary& vocab) {
    if (wildcard == "letters") return bench::TemplateSet::letters(letter_class);
    std::vector<std::string> words;
    for (const auto& t : vocab.tokens())
        if (!t.empty() && std::all_of(t.begin(), t.end(), [](unsigned char c) { return std::isalpha(c); }))
            words.push_back(t);
    return bench::TemplateSet::lexicon(std::move(words));
}

char pad_char_of(const Vocabulary& vocab) {
    if (!vocab.pad()) throw ValidationError("vocabulary has no pad token");
    const auto& p = vocab.token(*vocab.pad());
    if (p.size() != 1) throw ValidationError("pad token must be a single character");
    return p[0];
}

// ---- compile / align / score -------------------------------------------------

struct CompileArgs {
    std::string regex, alphabet, out;
    int state_cap = 10'000;
};

int run_compile(const CompileArgs& a) {
    CompileOptions opts;
    opts.state_cap = a.state_cap;
    const Dfa dfa = minimize(compile(a.regex, Alphabet(a.alphabet), opts));
    emit(a.out, io::dfa_to_text(dfa));
    (a.out.empty() ? std::cerr : std::cout) << "states " << dfa.num_states << "\ntransitions "
                                            << dfa.num_transitions() << "\n";
    return kExitOk;
}

struct AlignArgs {
    std::string dfa, vocab, out;
    std::size_t transition_cap = 10'000'000;
};

int run_align(const AlignArgs& a) {
    AlignOptions opts;
    opts.transition_cap = a.transition_cap;
    const auto aligned = align(io::dfa_from_text(io::read_file(a.dfa)),
                               io::vocabulary_from_text(io::read_file(a.vocab)), opts);
    io::write_file(a.out, io::aligned_to_text(aligned));
    std::cout << "states " << aligned.num_states() << "\ntransitions " << aligned.num_transitions() << "\n";
    return kExitOk;
}

struct ScoreArgs {
    std::string aligned, unigram, out;
};

int run_score(const ScoreArgs& a) {
    const auto aligned = io::aligned_from_text(io::read_file(a.aligned));
    const auto u = io::unigram_from_text(io::read_file(a.unigram));
    const auto r = expected_probability(aligned, u);
    json doc{{"expected", r.expected},
             {"log_expected", std::isfinite(r.log_expected) ? json(r.log_expected) : json(nullptr)}};
    emit(a.out, doc.dump(1) + "\n");
    return kExitOk;
}

// ---- gradcheck -----------------------------------------------------------------

struct GradcheckArgs {
    std::uint64_t seed = 0;
    int cases = 100;
};

constexpr double kGradTolerance = 1e-4;
constexpr double kFiniteStep = 1e-5;
// Central differences at this step carry about 1e-12 of rounding noise, so
// relative errors are measured against at least this magnitude.
constexpr double kGradFloor = 1e-6;

Dfa random_dfa(std::mt19937_64& rng) {
    const Alphabet alphabet("abc");
    const int n = std::uniform_int_distribution<int>(1, 6)(rng);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> state(0, n - 1);
    Dfa dfa(alphabet, n, 0);
    for (int q = 0; q < n; ++q) {
        dfa.accepting[static_cast<std::size_t>(q)] = unit(rng) < 0.4;
        for (std::size_t s = 0; s < alphabet.size(); ++s)
            if (unit(rng) < 0.7) dfa.set_next(q, s, state(rng));
    }
    dfa.accepting[static_cast<std::size_t>(state(rng))] = true;
    return dfa;
}

Vocabulary random_vocabulary(std::mt19937_64& rng) {
    static const std::vector<std::string> pool{"a", "b", "c", "ab", "ba", "ca", "cc", "abc"};
    std::vector<std::string> tokens;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (const auto& t : pool)
        if (unit(rng) < 0.6) tokens.push_back(t);
    if (tokens.empty()) tokens.push_back("a");
    return Vocabulary(std::move(tokens));
}

int run_gradcheck(const GradcheckArgs& a) {
    if (a.cases < 1) throw ValidationError("--cases must be positive");
    std::mt19937_64 rng(a.seed);
    std::uniform_real_distribution<double> unit(0.05, 1.0);
    double worst = 0.0;
    int failures = 0;
    for (int c = 0; c < a.cases; ++c) {
        const auto aligned = align(random_dfa(rng), random_vocabulary(rng));
        const int l = std::uniform_int_distribution<int>(1, 5)(rng);
        const auto v = static_cast<int>(aligned.vocabulary().size());
        UnigramMatrix u(l, v);
        for (Eigen::Index i = 0; i < u.size(); ++i) u.data()[i] = unit(rng);
        for (int k = 0; k < l; ++k) u.row(k) /= u.row(k).sum();

        const Eigen::MatrixXd g = *expected_probability_with_grad(aligned, u).gradient;
        double err = 0.0;
        for (int k = 0; k < l; ++k)
            for (int j = 0; j < v; ++j) {
                UnigramMatrix up = u, down = u;
                up(k, j) += kFiniteStep;
                down(k, j) -= kFiniteStep;
                const double fd = (expected_probability(aligned, up).expected -
                                   expected_probability(aligned, down).expected) /
                                  (2.0 * kFiniteStep);
                err = std::max(err, std::abs(g(k, j) - fd) / std::max({std::abs(fd), std::abs(g(k, j)), kGradFloor}));
            }
        worst = std::max(worst, err);
        if (err > kGradTolerance) {
            ++failures;
            std::cout << "case " << c << " relative error " << err << "\n";
        }
    }
    std::cout << "seed " << a.seed << "\ncases " << a.cases << "\nmax_relative_error " << worst << "\ntolerance "
              << kGradTolerance << "\n"
              << (failures ? "FAIL" : "PASS") << "\n";
    return failures ? kExitVerification : kExitOk;
}

// ---- corpus / training -------------------------------------------------------

struct CorpusArgs {
    std::size_t sentences = 4000;
    double fraction = 0.75;
    std::uint64_t seed = 1;
    std::string out, vocab_out;
};

int run_make_corpus(const CorpusArgs& a) {
    if (a.fraction < 0.0 || a.fraction > 1.0) throw ValidationError("--fraction must lie in [0, 1]");
    std::string text;
    for (const auto& s : toy::generate_sentences({a.sentences, a.fraction, a.seed})) text += s + "\n";
    emit(a.out, text);
    if (!a.vocab_out.empty()) io::write_file(a.vocab_out, io::vocabulary_to_text(toy::vocabulary()));
    return kExitOk;
}

struct TrainArgs {
    std::string corpus, vocab, out;
    ModelConfig config;
    TrainOptions train;
};

int run_train(const TrainArgs& a) {
    a.config.validate();
    const auto vocab = io::vocabulary_from_text(io::read_file(a.vocab));
    const auto corpus = toy::encode(read_lines(a.corpus), vocab, a.config.seq_len);
    const auto result = train(corpus, a.config, vocab, a.train);
    save_checkpoint(result.model, a.out);
    std::cout << "seed " << a.train.seed << "\nsequences " << corpus.size() << "\nepochs " << a.train.epochs
              << "\nfinal_loss " << result.epoch_loss.back() << "\n";
    return kExitOk;
}

// ---- benchmark suites ------------------------------------------------------------

struct SuiteArgs {
    std::string corpus, vocab, out, wildcard = "lexicon", letters = "a-z";
    int per_kind = 2;
    std::uint64_t seed = 0;
    char pad = toy::kPadChar;
};

int run_make_suite(const SuiteArgs& a) {
    std::optional<Vocabulary> vocab;
    if (!a.vocab.empty()) vocab = io::vocabulary_from_text(io::read_file(a.vocab));
    if (a.wildcard == "lexicon" && !vocab) throw ValidationError("--wildcard lexicon needs --vocab");
    const auto ts = template_set(a.wildcard, a.letters, vocab ? *vocab : Vocabulary({"a"}));
    const char pad = vocab && vocab->pad() ? pad_char_of(*vocab) : a.pad;
    const auto suite = bench::generate_suite(read_lines(a.corpus), a.per_kind, a.seed, ts, pad);
    emit(a.out, bench::suite_to_text(suite));
    return kExitOk;
}

// ---- sampling -------------------------------------------------------------------

struct SampleArgs {
    std::string checkpoint, regex, alphabet, out;
    double gamma = 2.5;
    int samples = 10, steps = 0, state_cap = 10'000;
    std::size_t transition_cap = 10'000'000;
    std::uint64_t seed = 0;
    std::string readout = "denoiser";
    GuidanceConfig guidance;
};

int run_sample(const SampleArgs& a) {
    if (a.samples < 1) throw ValidationError("--samples must be positive");
    const auto model = load_checkpoint(a.checkpoint);
    const auto& vocab = model.vocabulary();
    const Alphabet alphabet = a.alphabet.empty() ? vocabulary_alphabet(vocab) : Alphabet(a.alphabet);
    const int steps = a.steps > 0 ? a.steps : model.config().timesteps;
    GuidanceConfig g = a.guidance;
    g.scale = a.gamma;
    g.readout = readout_from_string(a.readout);
    g.validate();

    std::optional<Dfa> dfa;
    std::optional<AlignedAutomaton> aligned;
    if (!a.regex.empty()) {
        CompileOptions copts;
        copts.state_cap = a.state_cap;
        AlignOptions aopts;
        aopts.transition_cap = a.transition_cap;
        dfa = minimize(compile(a.regex, alphabet, copts));
        aligned = align(*dfa, vocab, aopts);
    }
    const AlignedAutomaton* constraint = aligned && a.gamma > 0.0 ? &*aligned : nullptr;

    std::string text = json{{"command", "sample"},
                            {"seed", a.seed},
                            {"gamma", a.gamma},
                            {"regex", a.regex.empty() ? json(nullptr) : json(a.regex)},
                            {"samples", a.samples},
                            {"steps", steps},
                            {"smooth", g.smoothing},
                            {"clip", g.clip},
                            {"readout", to_string(g.readout)}}
                           .dump() +
                       "\n";
    int hits = 0;
    for (int i = 0; i < a.samples; ++i) {
        const std::uint64_t s = a.seed + static_cast<std::uint64_t>(i);
        const auto r = sample(model, constraint, g, steps, s);
        json rec{{"index", i}, {"seed", s}, {"text", r.text}, {"tokens", r.tokens}};
        if (dfa) {
            const bool ok = std::all_of(r.text.begin(), r.text.end(), [&](char c) { return alphabet.contains(c); }) &&
                            accepts(*dfa, r.text);
            hits += ok;
            rec["satisfied"] = ok;
        }
        if (!r.log_e_trace.empty()) {
            auto finite_or_null = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
            rec["log_expected"] = finite_or_null(r.log_e_trace.back());
            json trace = json::array();
            for (double v : r.log_e_trace) trace.push_back(finite_or_null(v));
            rec["log_e_trace"] = std::move(trace);
        }
        text += rec.dump() + "\n";
    }
    emit(a.out, text);
    if (dfa && !a.out.empty()) std::cerr << "satisfied " << hits << "/" << a.samples << "\n";
    return kExitOk;
}

// ---- bench ----------------------------------------------------------------------

struct BenchArgs {
    std::string checkpoint, suite, alphabet, out, wildcard = "lexicon", letters = "a-z";
    std::vector<double> gammas{0.0, 1.0, 2.5};
    int samples = 200, k = 10, steps = 0;
    std::uint64_t seed = 0;
    std::string readout = "denoiser";
    GuidanceConfig guidance;
    bool timing = false;
};

int run_bench(const BenchArgs& a) {
    const auto model = load_checkpoint(a.checkpoint);
    const auto& vocab = model.vocabulary();
    const Alphabet alphabet = a.alphabet.empty() ? vocabulary_alphabet(vocab) : Alphabet(a.alphabet);
    const auto ts = template_set(a.wildcard, a.letters, vocab);
    const auto cases = bench::suite_from_text(io::read_file(a.suite), ts, pad_char_of(vocab));
    for (double gamma : a.gammas)
        if (!(gamma >= 0.0)) throw ValidationError("guidance scales must be non-negative");

    bench::EvalOptions opts;
    opts.gammas = a.gammas;
    opts.samples = a.samples;
    opts.k = a.k;
    opts.steps = a.steps;
    opts.seed = a.seed;
    opts.guidance = a.guidance;
    opts.guidance.readout = readout_from_string(a.readout);
    opts.timing = a.timing;
    const auto report = bench::evaluate(model, cases, alphabet, opts);

    const json run{{"command", "bench"}, {"seed", a.seed},   {"gammas", a.gammas},     {"samples", a.samples},
                   {"k", a.k},           {"steps", a.steps > 0 ? a.steps : model.config().timesteps},
                   {"cases", cases.size()}, {"smooth", a.guidance.smoothing}, {"clip", a.guidance.clip},
                   {"readout", a.readout}};
    io::write_file(a.out + ".json", bench::report_to_json(report, run));
    io::write_file(a.out + ".csv", bench::report_to_csv(report));
    for (double gamma : a.gammas) std::cout << "gamma " << gamma << " mean_rate " << bench::mean_rate(report, gamma) << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Regex-constrained sampling for a toy diffusion language model"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "rcdiff 0.1.0");

    CompileArgs compile_args;
    auto* compile_cmd = app.add_subcommand("compile", "Compile a regex to a minimal DFA");
    compile_cmd->add_option("--regex", compile_args.regex, "Pattern")->required();
    compile_cmd->add_option("--alphabet", compile_args.alphabet, "Alphabet characters")->required();
    compile_cmd->add_option("--state-cap", compile_args.state_cap, "Maximum DFA states")->check(CLI::PositiveNumber);
    compile_cmd->add_option("--out", compile_args.out, "DFA file (stdout if omitted)");

    AlignArgs align_args;
    auto* align_cmd = app.add_subcommand("align", "Align a DFA with a vocabulary");
    align_cmd->add_option("--dfa", align_args.dfa, "DFA file")->required()->check(CLI::ExistingFile);
    align_cmd->add_option("--vocab", align_args.vocab, "Vocabulary file")->required()->check(CLI::ExistingFile);
    align_cmd->add_option("--transition-cap", align_args.transition_cap, "Maximum token transitions")
        ->check(CLI::PositiveNumber);
    align_cmd->add_option("--out", align_args.out, "Aligned automaton file")->required();

    ScoreArgs score_args;
    auto* score_cmd = app.add_subcommand("score", "Expected acceptance probability of a unigram matrix");
    score_cmd->add_option("--aligned", score_args.aligned, "Aligned automaton file")->required()->check(CLI::ExistingFile);
    score_cmd->add_option("--unigram", score_args.unigram, "Unigram matrix file")->required()->check(CLI::ExistingFile);
    score_cmd->add_option("--out", score_args.out, "Result file (stdout if omitted)");

    GradcheckArgs grad_args;
    auto* grad_cmd = app.add_subcommand("gradcheck", "Compare gradients with finite differences");
    grad_cmd->add_option("--seed", grad_args.seed, "Random seed");
    grad_cmd->add_option("--cases", grad_args.cases, "Number of random instances");

    CorpusArgs corpus_args;
    auto* corpus_cmd = app.add_subcommand("make-corpus", "Write the synthetic two-branch corpus");
    corpus_cmd->add_option("--sentences", corpus_args.sentences, "Number of sentences");
    corpus_cmd->add_option("--fraction", corpus_args.fraction, "Share of A-branch sentences");
    corpus_cmd->add_option("--seed", corpus_args.seed, "Random seed");
    corpus_cmd->add_option("--out", corpus_args.out, "Corpus file (stdout if omitted)");
    corpus_cmd->add_option("--vocab-out", corpus_args.vocab_out, "Also write the corpus vocabulary here");

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "Train a model on a corpus");
    train_cmd->add_option("--corpus", train_args.corpus, "One sentence per line")->required()->check(CLI::ExistingFile);
    train_cmd->add_option("--vocab", train_args.vocab, "Vocabulary file")->required()->check(CLI::ExistingFile);
    train_cmd->add_option("--seq-len", train_args.config.seq_len, "Tokens per sequence");
    train_cmd->add_option("--embed-dim", train_args.config.embed_dim, "Embedding width");
    train_cmd->add_option("--hidden", train_args.config.hidden, "Denoiser hidden width");
    train_cmd->add_option("--timesteps", train_args.config.timesteps, "Diffusion steps T");
    train_cmd->add_option("--epochs", train_args.train.epochs, "Training epochs");
    train_cmd->add_option("--batch-size", train_args.train.batch_size, "Minibatch size");
    train_cmd->add_option("--lr", train_args.train.learning_rate, "Initial learning rate");
    train_cmd->add_option("--seed", train_args.train.seed, "Random seed");
    train_cmd->add_option("--out", train_args.out, "Checkpoint file")->required();

    SuiteArgs suite_args;
    auto* suite_cmd = app.add_subcommand("make-suite", "Draw benchmark cases from a corpus");
    suite_cmd->add_option("--corpus", suite_args.corpus, "One sentence per line")->required()->check(CLI::ExistingFile);
    suite_cmd->add_option("--vocab", suite_args.vocab, "Vocabulary file")->check(CLI::ExistingFile);
    suite_cmd->add_option("--per-kind", suite_args.per_kind, "Cases per template")->check(CLI::PositiveNumber);
    suite_cmd->add_option("--wildcard", suite_args.wildcard, "Word wildcard")->check(CLI::IsMember({"lexicon", "letters"}));
    suite_cmd->add_option("--letters", suite_args.letters, "Letter class for --wildcard letters");
    suite_cmd->add_option("--seed", suite_args.seed, "Random seed");
    suite_cmd->add_option("--out", suite_args.out, "Suite file (stdout if omitted)");

    SampleArgs sample_args;
    auto* sample_cmd = app.add_subcommand("sample", "Draw samples, optionally guided by a regex");
    sample_cmd->add_option("--checkpoint", sample_args.checkpoint, "Model checkpoint")->required()->check(CLI::ExistingFile);
    sample_cmd->add_option("--regex", sample_args.regex, "Constraint over the whole padded text");
    sample_cmd->add_option("--alphabet", sample_args.alphabet, "Alphabet (default: characters of the vocabulary)");
    sample_cmd->add_option("--gamma", sample_args.gamma, "Guidance scale");
    sample_cmd->add_option("--samples", sample_args.samples, "Number of samples");
    sample_cmd->add_option("--steps", sample_args.steps, "Sampling steps (default: T)");
    sample_cmd->add_option("--seed", sample_args.seed, "Random seed");
    sample_cmd->add_option("--smooth", sample_args.guidance.smoothing, "Unigram smoothing weight");
    sample_cmd->add_option("--clip", sample_args.guidance.clip, "Per-position gradient norm clip");
    sample_cmd->add_option("--readout", sample_args.readout, "Token distribution scored by the guidance")
        ->check(CLI::IsMember({"denoiser", "embedding"}));
    sample_cmd->add_option("--state-cap", sample_args.state_cap, "Maximum DFA states")->check(CLI::PositiveNumber);
    sample_cmd->add_option("--transition-cap", sample_args.transition_cap, "Maximum token transitions")
        ->check(CLI::PositiveNumber);
    sample_cmd->add_option("--out", sample_args.out, "JSON-lines output (stdout if omitted)");

    BenchArgs bench_args;
    auto* bench_cmd = app.add_subcommand("bench", "Evaluate a suite at several guidance scales");
    bench_cmd->add_option("--checkpoint", bench_args.checkpoint, "Model checkpoint")->required()->check(CLI::ExistingFile);
    bench_cmd->add_option("--suite", bench_args.suite, "Suite file")->required()->check(CLI::ExistingFile);
    bench_cmd->add_option("--alphabet", bench_args.alphabet, "Alphabet (default: characters of the vocabulary)");
    bench_cmd->add_option("--wildcard", bench_args.wildcard, "Word wildcard")->check(CLI::IsMember({"lexicon", "letters"}));
    bench_cmd->add_option("--letters", bench_args.letters, "Letter class for --wildcard letters");
    bench_cmd->add_option("--gamma", bench_args.gammas, "Guidance scales")->delimiter(',');
    bench_cmd->add_option("--samples", bench_args.samples, "Samples per case and scale");
    bench_cmd->add_option("--k", bench_args.k, "k of pass@k");
    bench_cmd->add_option("--steps", bench_args.steps, "Sampling steps (default: T)");
    bench_cmd->add_option("--seed", bench_args.seed, "Random seed");
    bench_cmd->add_option("--smooth", bench_args.guidance.smoothing, "Unigram smoothing weight");
    bench_cmd->add_option("--clip", bench_args.guidance.clip, "Per-position gradient norm clip");
    bench_cmd->add_option("--readout", bench_args.readout, "Token distribution scored by the guidance")
        ->check(CLI::IsMember({"denoiser", "embedding"}));
    bench_cmd->add_flag("--timing", bench_args.timing, "Record wall time per case and scale");
    bench_cmd->add_option("--out", bench_args.out, "Report path prefix (.json and .csv)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*compile_cmd) return run_compile(compile_args);
        if (*align_cmd) return run_align(align_args);
        if (*score_cmd) return run_score(score_args);
        if (*grad_cmd) return run_gradcheck(grad_args);
        if (*corpus_cmd) return run_make_corpus(corpus_args);
        if (*train_cmd) return run_train(train_args);
        if (*suite_cmd) return run_make_suite(suite_args);
        if (*sample_cmd) return run_sample(sample_args);
        if (*bench_cmd) return run_bench(bench_args);
    } catch (const rcdiff::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    }
    return kExitUsage;
}

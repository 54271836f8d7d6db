#pragma once

// Probability that a sequence drawn position-by-position from a unigram
// matrix is accepted by a token-level automaton, and its gradient.
//
// The state distribution is pushed through one transition matrix per
// position. Vectors are renormalized (L1) after every step and the log of
// each normalizer is accumulated, so long sequences neither underflow nor
// lose relative precision. Transition matrices are never formed: each step
// walks the automaton's (from, to) transition groups.

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rcdiff/alignment.hpp"
#include "rcdiff/error.hpp"

namespace rcdiff {

/// Rows are sequence positions, columns are token ids. Each row is a
/// probability distribution over the vocabulary.
using UnigramMatrix = Eigen::MatrixXd;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Throws ValidationError unless `u` is row-stochastic within `tolerance`.
inline void validate_unigram(const UnigramMatrix& u, double tolerance = 1e-9) {
    for (Eigen::Index k = 0; k < u.rows(); ++k) {
        for (Eigen::Index j = 0; j < u.cols(); ++j)
            if (!std::isfinite(u(k, j)) || u(k, j) < 0.0)
                throw ValidationError("unigram entry (" + std::to_string(k) + ", " + std::to_string(j) +
                                      ") is negative or not finite");
        if (std::abs(u.row(k).sum() - 1.0) > tolerance)
            throw ValidationError("unigram row " + std::to_string(k) + " does not sum to 1");
    }
}

/// Normalized forward vectors p̂_0..p̂_l and the running log normalizers.
/// The unnormalized vector at step k is p̂_k * exp(log_scale[k]); once the
/// mass vanishes p̂_k is zero and log_scale[k] is -inf.
struct ForwardState {
    std::vector<Eigen::VectorXd> normalized;
    std::vector<double> log_scale;
};

struct AcceptanceResult {
    double log_expected = kNegInf;  // authoritative; -inf when E == 0
    double expected = 0.0;
    std::optional<Eigen::MatrixXd> gradient;  // dE/du, same shape as u
};

namespace detail {

inline void check_shapes(const AlignedAutomaton& a, const UnigramMatrix& u) {
    if (static_cast<std::size_t>(u.cols()) != a.vocabulary().size())
        throw ValidationError("unigram matrix has " + std::to_string(u.cols()) +
                              " columns but the vocabulary has " +
                              std::to_string(a.vocabulary().size()) + " tokens");
}

// weights(k, g) = sum of u(k, tok) over the tokens of group g.
inline Eigen::MatrixXd group_weights(const AlignedAutomaton& a, const UnigramMatrix& u) {
    const auto& groups = a.groups();
    Eigen::MatrixXd w(u.rows(), static_cast<Eigen::Index>(groups.size()));
    for (Eigen::Index k = 0; k < u.rows(); ++k)
        for (std::size_t g = 0; g < groups.size(); ++g) {
            double s = 0.0;
            for (TokenId tok : groups[g].tokens) s += u(k, tok);
            w(k, static_cast<Eigen::Index>(g)) = s;
        }
    return w;
}

// Rescales v to unit L1 norm and returns the log of the old norm (or -inf).
inline double renormalize(Eigen::VectorXd& v) {
    double norm = v.cwiseAbs().sum();
    if (norm == 0.0 || !std::isfinite(norm)) {
        v.setZero();
        return kNegInf;
    }
    v /= norm;
    return std::log(norm);
}

inline ForwardState forward(const AlignedAutomaton& a, const Eigen::MatrixXd& weights) {
    const auto& groups = a.groups();
    ForwardState fs;
    Eigen::VectorXd p = Eigen::VectorXd::Zero(a.num_states());
    p(a.start()) = 1.0;
    fs.normalized.push_back(p);
    fs.log_scale.push_back(0.0);
    for (Eigen::Index k = 0; k < weights.rows(); ++k) {
        Eigen::VectorXd next = Eigen::VectorXd::Zero(a.num_states());
        if (fs.log_scale.back() != kNegInf)
            for (std::size_t g = 0; g < groups.size(); ++g)
                next(groups[g].to) += p(groups[g].from) * weights(k, static_cast<Eigen::Index>(g));
        double step = renormalize(next);
        fs.log_scale.push_back(fs.log_scale.back() == kNegInf ? kNegInf : fs.log_scale.back() + step);
        fs.normalized.push_back(next);
        p = std::move(next);
    }
    return fs;
}

// Normalized backward vectors b̂_0..b̂_l with b_l = indicator of the accepting set.
inline ForwardState backward(const AlignedAutomaton& a, const Eigen::MatrixXd& weights) {
    const auto& groups = a.groups();
    const auto l = static_cast<std::size_t>(weights.rows());
    ForwardState bs;
    bs.normalized.assign(l + 1, Eigen::VectorXd());
    bs.log_scale.assign(l + 1, 0.0);
    Eigen::VectorXd b(a.num_states());
    for (int q = 0; q < a.num_states(); ++q) b(q) = a.is_accepting(q) ? 1.0 : 0.0;
    bs.log_scale[l] = renormalize(b);
    bs.normalized[l] = b;
    for (std::size_t k = l; k > 0; --k) {
        Eigen::VectorXd prev = Eigen::VectorXd::Zero(a.num_states());
        if (bs.log_scale[k] != kNegInf)
            for (std::size_t g = 0; g < groups.size(); ++g)
                prev(groups[g].from) +=
                    weights(static_cast<Eigen::Index>(k - 1), static_cast<Eigen::Index>(g)) * b(groups[g].to);
        double step = renormalize(prev);
        bs.log_scale[k - 1] = bs.log_scale[k] == kNegInf ? kNegInf : bs.log_scale[k] + step;
        bs.normalized[k - 1] = prev;
        b = std::move(prev);
    }
    return bs;
}

inline AcceptanceResult finish(const AlignedAutomaton& a, const ForwardState& fs) {
    double mass = 0.0;
    for (int q = 0; q < a.num_states(); ++q)
        if (a.is_accepting(q)) mass += fs.normalized.back()(q);
    AcceptanceResult r;
    double log_scale = fs.log_scale.back();
    if (log_scale == kNegInf || mass == 0.0) return r;
    r.expected = mass * std::exp(log_scale);
    r.log_expected = mass > 0.0 ? log_scale + std::log(mass) : kNegInf;
    return r;
}

// d(E)/du scaled by exp(-log_divisor); log_divisor = 0 gives dE/du and
// log_divisor = log E gives d(log E)/du without ever forming E.
inline Eigen::MatrixXd scaled_gradient(const AlignedAutomaton& a, const UnigramMatrix& u,
                                       const ForwardState& fs, const ForwardState& bs,
                                       double log_divisor) {
    const auto& groups = a.groups();
    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(u.rows(), u.cols());
    for (Eigen::Index k = 0; k < u.rows(); ++k) {
        const auto i = static_cast<std::size_t>(k);
        double log_factor = fs.log_scale[i] + bs.log_scale[i + 1];
        if (log_factor == kNegInf) continue;
        double factor = std::exp(log_factor - log_divisor);
        const auto& alpha = fs.normalized[i];
        const auto& beta = bs.normalized[i + 1];
        for (const auto& g : groups) {
            double coef = alpha(g.from) * beta(g.to);
            if (coef == 0.0) continue;
            coef *= factor;
            for (TokenId tok : g.tokens) grad(k, tok) += coef;
        }
    }
    return grad;
}

}  // namespace detail

/// Probability mass step k (1-based) places on moving q -> q2.
inline double transition_weight(const AlignedAutomaton& a, const UnigramMatrix& u, int k, StateId q,
                                StateId q2) {
    detail::check_shapes(a, u);
    if (k < 1 || k > u.rows()) throw ValidationError("step index out of range");
    for (const auto& g : a.groups())
        if (g.from == q && g.to == q2) {
            double s = 0.0;
            for (TokenId tok : g.tokens) s += u(k - 1, tok);
            return s;
        }
    return 0.0;
}

/// Scaled forward recursion; exposed for inspection and tests.
inline ForwardState forward_pass(const AlignedAutomaton& a, const UnigramMatrix& u) {
    detail::check_shapes(a, u);
    return detail::forward(a, detail::group_weights(a, u));
}

/// Expected acceptance probability of a sequence of u.rows() tokens drawn
/// independently per position from the rows of `u`.
inline AcceptanceResult expected_probability(const AlignedAutomaton& a, const UnigramMatrix& u) {
    detail::check_shapes(a, u);
    return detail::finish(a, detail::forward(a, detail::group_weights(a, u)));
}

/// Same as expected_probability, plus dE/du(k, tok) from forward-backward:
/// the sum over transitions (q, tok, q2) of forward mass at q before step k
/// times backward mass at q2 after it.
inline AcceptanceResult expected_probability_with_grad(const AlignedAutomaton& a, const UnigramMatrix& u) {
    detail::check_shapes(a, u);
    auto w = detail::group_weights(a, u);
    auto fs = detail::forward(a, w);
    auto bs = detail::backward(a, w);
    auto r = detail::finish(a, fs);
    r.gradient = detail::scaled_gradient(a, u, fs, bs, 0.0);
    return r;
}

struct LogGradOptions {
    double floor = 1e-30;
    double smoothing = 1e-6;
};

/// log E and its gradient after mixing every row with the uniform
/// distribution at weight `smoothing`. The gradient is taken with respect to
/// the unsmoothed matrix. Returns a zero gradient when even the smoothed
/// expectation vanishes (no accepted sequence of this length exists).
inline std::pair<double, Eigen::MatrixXd> smoothed_log_gradient(const AlignedAutomaton& a,
                                                                const UnigramMatrix& u,
                                                                double smoothing) {
    detail::check_shapes(a, u);
    const double uniform = u.cols() > 0 ? 1.0 / static_cast<double>(u.cols()) : 0.0;
    UnigramMatrix mixed = (1.0 - smoothing) * u;
    mixed.array() += smoothing * uniform;
    auto w = detail::group_weights(a, mixed);
    auto fs = detail::forward(a, w);
    auto r = detail::finish(a, fs);
    if (r.log_expected == kNegInf) return {kNegInf, Eigen::MatrixXd::Zero(u.rows(), u.cols())};
    auto bs = detail::backward(a, w);
    Eigen::MatrixXd g = detail::scaled_gradient(a, mixed, fs, bs, r.log_expected);
    return {r.log_expected, (1.0 - smoothing) * g};
}

/// Gradient of log E with respect to the unigram matrix. When E falls below
/// `floor` the gradient of the smoothed surrogate is returned instead, so the
/// result is finite everywhere.
inline Eigen::MatrixXd log_grad_wrt_unigram(const AlignedAutomaton& a, const UnigramMatrix& u,
                                            const LogGradOptions& options = {}) {
    detail::check_shapes(a, u);
    auto w = detail::group_weights(a, u);
    auto fs = detail::forward(a, w);
    auto r = detail::finish(a, fs);
    if (r.log_expected >= std::log(options.floor)) {
        auto bs = detail::backward(a, w);
        return detail::scaled_gradient(a, u, fs, bs, r.log_expected);
    }
    return smoothed_log_gradient(a, u, options.smoothing).second;
}

}  // namespace rcdiff

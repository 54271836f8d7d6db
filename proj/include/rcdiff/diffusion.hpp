#pragma once

// Desk-scale continuous diffusion language model.
//
// A sequence of l tokens lives in latent space as an l x d matrix whose rows
// are token embeddings. The forward process is the usual DDPM corruption; a
// small residual MLP predicts the clean latent from (x_t, t); the decoder
// reads a latent as one softmax over the vocabulary per position, i.e. a
// unigram matrix. Regex guidance adds the gradient of log E[s in L] under
// that unigram matrix to every reverse step.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rcdiff/acceptance.hpp"
#include "rcdiff/alignment.hpp"
#include "rcdiff/error.hpp"

namespace rcdiff {

/// l x d latent; rows are positions.
using Latent = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Linear beta schedule with the cumulative products and posterior standard
/// deviations it implies. Index t runs 1..T; alpha_bar(0) == 1.
class NoiseSchedule {
public:
    NoiseSchedule() = default;

    NoiseSchedule(int timesteps, double beta_start, double beta_end) : beta_start_(beta_start), beta_end_(beta_end) {
        if (timesteps < 1) throw ValidationError("schedule needs at least one timestep");
        if (!(beta_start > 0.0 && beta_end < 1.0 && beta_start <= beta_end))
            throw ValidationError("betas must satisfy 0 < beta_start <= beta_end < 1");
        const auto n = static_cast<std::size_t>(timesteps);
        beta_.assign(n + 1, 0.0);
        alpha_bar_.assign(n + 1, 1.0);
        sigma_.assign(n + 1, 0.0);
        for (std::size_t t = 1; t <= n; ++t) {
            beta_[t] = timesteps == 1 ? beta_start
                                      : beta_start + (beta_end - beta_start) * static_cast<double>(t - 1) /
                                                         static_cast<double>(timesteps - 1);
            alpha_bar_[t] = alpha_bar_[t - 1] * (1.0 - beta_[t]);
            sigma_[t] = std::sqrt((1.0 - alpha_bar_[t - 1]) / (1.0 - alpha_bar_[t]) * beta_[t]);
        }
    }

    int timesteps() const noexcept { return static_cast<int>(beta_.size()) - 1; }
    double beta_start() const noexcept { return beta_start_; }
    double beta_end() const noexcept { return beta_end_; }
    double beta(int t) const { return beta_.at(static_cast<std::size_t>(t)); }
    double alpha_bar(int t) const { return alpha_bar_.at(static_cast<std::size_t>(t)); }
    /// Posterior standard deviation of x_{t-1} given x_t and x_0; sigma(1) == 0.
    double sigma(int t) const { return sigma_.at(static_cast<std::size_t>(t)); }

private:
    double beta_start_ = 0.0;
    double beta_end_ = 0.0;
    std::vector<double> beta_;
    std::vector<double> alpha_bar_;
    std::vector<double> sigma_;
};

/// Coefficients of the reverse step between two points of the schedule:
/// mean = x0_coef * x0_pred + xt_coef * x_t, plus sigma * noise.
struct PosteriorCoefficients {
    double x0_coef;
    double xt_coef;
    double sigma;

    static PosteriorCoefficients between(double alpha_bar_t, double alpha_bar_prev) {
        const double beta = 1.0 - alpha_bar_t / alpha_bar_prev;
        const double denom = 1.0 - alpha_bar_t;
        return {std::sqrt(alpha_bar_prev) * beta / denom,
                std::sqrt(1.0 - beta) * (1.0 - alpha_bar_prev) / denom,
                std::sqrt((1.0 - alpha_bar_prev) / denom * beta)};
    }
};

struct ModelConfig {
    int seq_len = 16;
    int embed_dim = 16;
    int hidden = 256;
    int timesteps = 200;
    double beta_start = 1e-4;
    double beta_end = 0.02;
    double temperature = 0.5;
    int time_features = 16;

    void validate() const {
        if (seq_len < 1 || embed_dim < 1 || hidden < 1 || timesteps < 1 || time_features < 2 || time_features % 2)
            throw ValidationError("model dimensions must be positive (time features even)");
        if (!(temperature > 0.0)) throw ValidationError("decoder temperature must be positive");
    }

    bool operator==(const ModelConfig&) const = default;
};

/// Residual MLP reading the flattened latent and a sinusoidal time embedding:
/// h1 = relu(W1 z + b1);  h2 = h1 + relu(W2 h1 + b2);  o = W3 h2 + b3.
/// o holds one row of token logits per position; the predicted x0 row is the
/// softmax of that row mixed over the embedding table.
struct Denoiser {
    Eigen::MatrixXd w1, w2, w3;
    Eigen::VectorXd b1, b2, b3;

    static Denoiser init(const ModelConfig& c, int vocab_size, std::mt19937_64& rng) {
        const int in = c.seq_len * c.embed_dim + c.time_features;
        const int out = c.seq_len * vocab_size;
        std::normal_distribution<double> normal(0.0, 1.0);
        auto he = [&](int rows, int cols, double scale) {
            Eigen::MatrixXd m(rows, cols);
            const double s = scale * std::sqrt(2.0 / cols);
            for (Eigen::Index j = 0; j < m.cols(); ++j)
                for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = s * normal(rng);
            return m;
        };
        Denoiser d;
        d.w1 = he(c.hidden, in, 1.0);
        d.w2 = he(c.hidden, c.hidden, 0.5);
        d.w3 = he(out, c.hidden, 0.1);
        d.b1 = Eigen::VectorXd::Zero(c.hidden);
        d.b2 = Eigen::VectorXd::Zero(c.hidden);
        d.b3 = Eigen::VectorXd::Zero(out);
        return d;
    }
};

inline Eigen::VectorXd time_embedding(int t, int timesteps, int features) {
    Eigen::VectorXd e(features);
    const int half = features / 2;
    for (int i = 0; i < half; ++i) {
        const double freq = std::pow(static_cast<double>(timesteps), -static_cast<double>(i) / half);
        e(2 * i) = std::sin(t * freq);
        e(2 * i + 1) = std::cos(t * freq);
    }
    return e;
}

class DiffusionModel {
public:
    DiffusionModel() = default;

    DiffusionModel(ModelConfig config, Vocabulary vocab, Eigen::MatrixXd embeddings, Denoiser denoiser)
        : config_(config),
          vocab_(std::move(vocab)),
          embeddings_(std::move(embeddings)),
          denoiser_(std::move(denoiser)),
          schedule_(config.timesteps, config.beta_start, config.beta_end) {
        config_.validate();
        const int in = config_.seq_len * config_.embed_dim + config_.time_features;
        const int out = config_.seq_len * static_cast<int>(vocab_.size());
        if (embeddings_.rows() != static_cast<Eigen::Index>(vocab_.size()) || embeddings_.cols() != config_.embed_dim)
            throw ValidationError("embedding table shape does not match vocabulary x embed_dim");
        if (denoiser_.w1.rows() != config_.hidden || denoiser_.w1.cols() != in ||
            denoiser_.w2.rows() != config_.hidden || denoiser_.w2.cols() != config_.hidden ||
            denoiser_.w3.rows() != out || denoiser_.w3.cols() != config_.hidden ||
            denoiser_.b1.size() != config_.hidden || denoiser_.b2.size() != config_.hidden ||
            denoiser_.b3.size() != out)
            throw ValidationError("denoiser parameter shapes do not match the model config");
    }

    /// Fresh model: unit-norm random embeddings and an initialized denoiser.
    static DiffusionModel initialize(const ModelConfig& config, Vocabulary vocab, std::uint64_t seed) {
        config.validate();
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> normal(0.0, 1.0);
        Eigen::MatrixXd emb(static_cast<Eigen::Index>(vocab.size()), config.embed_dim);
        for (Eigen::Index i = 0; i < emb.rows(); ++i) {
            for (Eigen::Index j = 0; j < emb.cols(); ++j) emb(i, j) = normal(rng);
            emb.row(i).normalize();
        }
        Denoiser d = Denoiser::init(config, static_cast<int>(vocab.size()), rng);
        return DiffusionModel(config, std::move(vocab), std::move(emb), std::move(d));
    }

    const ModelConfig& config() const noexcept { return config_; }
    const Vocabulary& vocabulary() const noexcept { return vocab_; }
    const Eigen::MatrixXd& embeddings() const noexcept { return embeddings_; }
    const Denoiser& denoiser() const noexcept { return denoiser_; }
    Denoiser& mutable_denoiser() noexcept { return denoiser_; }
    const NoiseSchedule& schedule() const noexcept { return schedule_; }

    /// Stacks the embedding rows of `tokens`.
    Latent embed(std::span<const TokenId> tokens) const {
        Latent x(static_cast<Eigen::Index>(tokens.size()), config_.embed_dim);
        for (std::size_t k = 0; k < tokens.size(); ++k)
            x.row(static_cast<Eigen::Index>(k)) = embeddings_.row(tokens[k]);
        return x;
    }

    /// Per-position token logits (l x |V|) of the denoiser at step t.
    Eigen::MatrixXd token_logits(const Latent& x_t, int t) const {
        check_latent(x_t);
        if (t < 1 || t > config_.timesteps) throw ValidationError("timestep out of range");
        const int flat = config_.seq_len * config_.embed_dim;
        const auto v = static_cast<Eigen::Index>(vocab_.size());
        Eigen::VectorXd z(flat + config_.time_features);
        z.head(flat) = Eigen::Map<const Eigen::VectorXd>(x_t.data(), flat);
        z.tail(config_.time_features) = time_embedding(t, config_.timesteps, config_.time_features);
        Eigen::VectorXd h1 = (denoiser_.w1 * z + denoiser_.b1).cwiseMax(0.0);
        Eigen::VectorXd h2 = h1 + (denoiser_.w2 * h1 + denoiser_.b2).cwiseMax(0.0);
        Eigen::VectorXd o = denoiser_.w3 * h2 + denoiser_.b3;
        return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            o.data(), config_.seq_len, v);
    }

    /// Gradient with respect to x_t of sum(upstream .* token_logits(x_t, t)).
    Latent token_logits_vjp(const Latent& x_t, int t, const Eigen::MatrixXd& upstream) const {
        check_latent(x_t);
        if (t < 1 || t > config_.timesteps) throw ValidationError("timestep out of range");
        const auto v = static_cast<Eigen::Index>(vocab_.size());
        if (upstream.rows() != config_.seq_len || upstream.cols() != v)
            throw ValidationError("upstream gradient shape does not match the logits");
        const int flat = config_.seq_len * config_.embed_dim;
        Eigen::VectorXd z(flat + config_.time_features);
        z.head(flat) = Eigen::Map<const Eigen::VectorXd>(x_t.data(), flat);
        z.tail(config_.time_features) = time_embedding(t, config_.timesteps, config_.time_features);
        const Eigen::VectorXd a1 = denoiser_.w1 * z + denoiser_.b1;
        const Eigen::VectorXd h1 = a1.cwiseMax(0.0);
        const Eigen::VectorXd a2 = denoiser_.w2 * h1 + denoiser_.b2;

        Eigen::VectorXd d_o(upstream.size());
        for (Eigen::Index k = 0; k < upstream.rows(); ++k) d_o.segment(k * v, v) = upstream.row(k).transpose();
        const Eigen::VectorXd d_h2 = denoiser_.w3.transpose() * d_o;
        const Eigen::VectorXd d_a2 = (a2.array() > 0.0).select(d_h2, 0.0);
        const Eigen::VectorXd d_h1 = d_h2 + denoiser_.w2.transpose() * d_a2;
        const Eigen::VectorXd d_a1 = (a1.array() > 0.0).select(d_h1, 0.0);
        const Eigen::VectorXd d_z = denoiser_.w1.leftCols(flat).transpose() * d_a1;
        Latent out(config_.seq_len, config_.embed_dim);
        Eigen::Map<Eigen::VectorXd>(out.data(), flat) = d_z;
        return out;
    }

    /// Per-position softmax of token_logits(x_t, t).
    UnigramMatrix token_distribution(const Latent& x_t, int t) const {
        Eigen::MatrixXd p = token_logits(x_t, t);
        for (Eigen::Index k = 0; k < p.rows(); ++k) {
            p.row(k) = (p.row(k).array() - p.row(k).maxCoeff()).exp().matrix();
            p.row(k) /= p.row(k).sum();
        }
        return p;
    }

    /// Predicted clean latent for x_t at step t.
    Latent predict_x0(const Latent& x_t, int t) const { return token_distribution(x_t, t) * embeddings_; }

    void check_latent(const Latent& x) const {
        if (x.rows() != config_.seq_len || x.cols() != config_.embed_dim)
            throw ValidationError("latent shape does not match the model");
    }

private:
    ModelConfig config_;
    Vocabulary vocab_;
    Eigen::MatrixXd embeddings_;
    Denoiser denoiser_;
    NoiseSchedule schedule_;
};

/// Per position, softmax over tokens of <x[k], embedding> / temperature.
/// `temperature` overrides the model's readout temperature when given.
inline UnigramMatrix decode(const DiffusionModel& model, const Latent& x,
                            std::optional<double> temperature = std::nullopt) {
    if (x.cols() != model.config().embed_dim) throw ValidationError("latent width does not match the model");
    if (!x.allFinite()) throw ValidationError("cannot decode a non-finite latent");
    const double tau = temperature.value_or(model.config().temperature);
    Eigen::MatrixXd logits = (x * model.embeddings().transpose()) / tau;
    for (Eigen::Index k = 0; k < logits.rows(); ++k) {
        const double m = logits.row(k).maxCoeff();
        logits.row(k) = (logits.row(k).array() - m).exp().matrix();
        logits.row(k) /= logits.row(k).sum();
    }
    return logits;
}

/// Per-position argmax token of decode(x); ties go to the lowest id.
inline std::vector<TokenId> argmax_tokens(const DiffusionModel& model, const Latent& x) {
    Eigen::MatrixXd scores = x * model.embeddings().transpose();
    std::vector<TokenId> out;
    for (Eigen::Index k = 0; k < scores.rows(); ++k) {
        Eigen::Index best = 0;
        scores.row(k).maxCoeff(&best);
        out.push_back(static_cast<TokenId>(best));
    }
    return out;
}

/// sqrt(alpha_bar_t) x0 + sqrt(1 - alpha_bar_t) noise.
inline Latent q_sample(const DiffusionModel& model, const Latent& x0, int t, const Latent& noise) {
    if (t < 1 || t > model.config().timesteps) throw ValidationError("timestep out of range");
    const double ab = model.schedule().alpha_bar(t);
    return std::sqrt(ab) * x0 + std::sqrt(1.0 - ab) * noise;
}

/// DDPM posterior mean of x_{t-1} given x_t and a predicted x0. At t == 1
/// the x_t coefficient is zero and the result is x0_pred.
inline Latent posterior_mean(const DiffusionModel& model, const Latent& x_t, const Latent& x0_pred, int t) {
    if (t < 1 || t > model.config().timesteps) throw ValidationError("timestep out of range");
    const auto c = PosteriorCoefficients::between(model.schedule().alpha_bar(t), model.schedule().alpha_bar(t - 1));
    return c.x0_coef * x0_pred + c.xt_coef * x_t;
}

/// Unguided reverse step: posterior mean plus sigma_t * noise.
inline Latent ddpm_step(const DiffusionModel& model, const Latent& x_t, int t, const Latent& noise) {
    Latent mean = posterior_mean(model, x_t, model.predict_x0(x_t, t), t);
    return mean + model.schedule().sigma(t) * noise;
}

/// Which unigram matrix the constraint is scored against at x_t.
///   Denoiser:  softmax of the denoiser's token logits at (x_t, t).
///   Embedding: decode(x_t), the dot-product readout of the latent itself.
enum class Readout { Denoiser, Embedding };

struct GuidanceConfig {
    double scale = 2.5;        // gamma
    double smoothing = 1e-6;   // uniform mixing weight before taking log E
    double clip = 10.0;        // max L2 norm of the gradient per position
    Readout readout = Readout::Denoiser;

    void validate() const {
        if (!(scale >= 0.0)) throw ValidationError("guidance scale must be non-negative");
        if (!(smoothing >= 0.0 && smoothing < 1.0)) throw ValidationError("smoothing must lie in [0, 1)");
        if (!(clip > 0.0)) throw ValidationError("clip threshold must be positive");
    }
};

inline std::string to_string(Readout r) { return r == Readout::Denoiser ? "denoiser" : "embedding"; }

inline Readout readout_from_string(std::string_view s) {
    if (s == "denoiser") return Readout::Denoiser;
    if (s == "embedding") return Readout::Embedding;
    throw ValidationError("unknown readout '" + std::string(s) + "'");
}

/// The unigram matrix guidance scores at (x_t, t).
inline UnigramMatrix guidance_readout(const DiffusionModel& model, const Latent& x_t, int t, Readout r) {
    return r == Readout::Denoiser ? model.token_distribution(x_t, t) : decode(model, x_t);
}

/// Gradient of log E_{s ~ readout(x_t)}[s in L] with respect to x_t, clipped
/// per position. Independent of cfg.scale.
inline Latent guidance_gradient(const DiffusionModel& model, const Latent& x_t, int t, const AlignedAutomaton& a,
                                const GuidanceConfig& cfg) {
    if (!(a.vocabulary() == model.vocabulary()))
        throw ValidationError("automaton vocabulary differs from the model vocabulary");
    if (!x_t.allFinite()) throw ValidationError("cannot guide a non-finite latent");
    UnigramMatrix u = guidance_readout(model, x_t, t, cfg.readout);
    Eigen::MatrixXd g = smoothed_log_gradient(a, u, cfg.smoothing).second;
    // softmax Jacobian: d/dlogits = u * (g - <g, u>)
    for (Eigen::Index k = 0; k < u.rows(); ++k) {
        const double centre = g.row(k).dot(u.row(k));
        g.row(k) = (u.row(k).array() * (g.row(k).array() - centre)).matrix();
    }
    Latent grad = cfg.readout == Readout::Denoiser ? model.token_logits_vjp(x_t, t, g)
                                                   : Latent((g * model.embeddings()) / model.config().temperature);
    if (!grad.allFinite()) throw Error("guidance gradient is not finite; check smoothing and clipping");
    for (Eigen::Index k = 0; k < grad.rows(); ++k) {
        const double norm = grad.row(k).norm();
        if (norm > cfg.clip) grad.row(k) *= cfg.clip / norm;
    }
    return grad;
}

/// Guided reverse step: posterior mean + scale * sigma_t^2 * guidance + sigma_t * noise.
inline Latent guided_step(const DiffusionModel& model, const Latent& x_t, int t, const AlignedAutomaton& a,
                          const GuidanceConfig& cfg, const Latent& noise) {
    const double sigma = model.schedule().sigma(t);
    Latent mean = posterior_mean(model, x_t, model.predict_x0(x_t, t), t);
    Latent pushed = mean + (cfg.scale * sigma * sigma) * guidance_gradient(model, x_t, t, a, cfg);
    return pushed + sigma * noise;
}

struct SampleResult {
    std::vector<TokenId> tokens;
    std::string text;
    /// log E under the constraint, one entry per visited latent from x_T
    /// down to x_0: the guidance readout for x_t, decode(x_0) for the last.
    /// Empty for unconstrained sampling.
    std::vector<double> log_e_trace;
};

/// Evenly spaced timesteps from T down to 1 (all T when steps == T).
inline std::vector<int> sampling_timesteps(int timesteps, int steps) {
    if (steps < 1 || steps > timesteps) throw ValidationError("steps must lie in [1, T]");
    std::vector<int> ts;
    for (int i = steps; i >= 1; --i) {
        const long v = (static_cast<long>(i) * timesteps + steps - 1) / steps;  // ceil(i * T / steps)
        ts.push_back(static_cast<int>(v));
    }
    return ts;
}

/// Full reverse process from x_T ~ N(0, I) followed by argmax decoding. With
/// fewer steps than T the schedule is respaced. Deterministic in `seed`.
inline SampleResult sample(const DiffusionModel& model, const AlignedAutomaton* constraint, const GuidanceConfig& cfg,
                           int steps, std::uint64_t seed) {
    cfg.validate();
    const auto& c = model.config();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto gaussian = [&]() {
        Latent n(c.seq_len, c.embed_dim);
        for (Eigen::Index i = 0; i < n.size(); ++i) n.data()[i] = normal(rng);
        return n;
    };

    SampleResult result;
    auto trace = [&](const UnigramMatrix& u) {
        if (constraint) result.log_e_trace.push_back(expected_probability(*constraint, u).log_expected);
    };

    const auto ts = sampling_timesteps(c.timesteps, steps);
    Latent x = gaussian();
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const int t = ts[i];
        const int prev = i + 1 < ts.size() ? ts[i + 1] : 0;
        Latent noise = gaussian();
        if (constraint) trace(guidance_readout(model, x, t, cfg.readout));
        if (prev == t - 1) {
            x = constraint ? guided_step(model, x, t, *constraint, cfg, noise) : ddpm_step(model, x, t, noise);
            continue;
        }
        const auto pc = PosteriorCoefficients::between(model.schedule().alpha_bar(t), model.schedule().alpha_bar(prev));
        Latent next = pc.x0_coef * model.predict_x0(x, t) + pc.xt_coef * x;
        if (constraint) next += (cfg.scale * pc.sigma * pc.sigma) * guidance_gradient(model, x, t, *constraint, cfg);
        x = next + pc.sigma * noise;
    }
    if (constraint) trace(decode(model, x));
    result.tokens = argmax_tokens(model, x);
    result.text = model.vocabulary().detokenize(result.tokens);
    return result;
}

}  // namespace rcdiff

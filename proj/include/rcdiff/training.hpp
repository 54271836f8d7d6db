#pragma once

// Minibatch training of the denoiser on a fixed-length token corpus.
//
// Loss per example: mean squared error between predicted and true x0 on a
// q_sample corruption at a uniformly drawn step, plus ce_weight times the
// mean cross-entropy of the denoiser's token logits against the clean tokens. Gradients
// are hand-derived; the optimizer is Adam. Embeddings stay fixed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "rcdiff/alignment.hpp"
#include "rcdiff/diffusion.hpp"
#include "rcdiff/error.hpp"

namespace rcdiff {

struct TrainOptions {
    int epochs = 200;
    int batch_size = 64;
    double learning_rate = 2e-3;
    double final_learning_rate = 2e-4;  // cosine decay target
    double ce_weight = 0.05;
    std::uint64_t seed = 0;
};

struct TrainResult {
    DiffusionModel model;
    std::vector<double> epoch_loss;  // mean minibatch loss per epoch
};

namespace detail {

struct AdamSlot {
    Eigen::MatrixXd m, v;
    explicit AdamSlot(const Eigen::MatrixXd& like)
        : m(Eigen::MatrixXd::Zero(like.rows(), like.cols())), v(Eigen::MatrixXd::Zero(like.rows(), like.cols())) {}

    template <typename Param>
    void step(Param& p, const Eigen::MatrixXd& g, double lr, long t) {
        constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
        m = b1 * m + (1.0 - b1) * g;
        v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
        const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
        const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
        p.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
    }
};

}  // namespace detail

inline void validate_corpus(const std::vector<std::vector<TokenId>>& corpus, const ModelConfig& config,
                            const Vocabulary& vocab) {
    if (corpus.empty()) throw ValidationError("training corpus is empty");
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        if (static_cast<int>(corpus[i].size()) != config.seq_len)
            throw ValidationError("corpus sequence " + std::to_string(i) + " has length " +
                                  std::to_string(corpus[i].size()) + ", expected " + std::to_string(config.seq_len));
        for (TokenId tok : corpus[i])
            if (tok < 0 || static_cast<std::size_t>(tok) >= vocab.size())
                throw ValidationError("corpus sequence " + std::to_string(i) + " has an out-of-range token");
    }
}

/// Right-pads with the vocabulary's pad token up to `length`.
inline std::vector<TokenId> pad_sequence(std::vector<TokenId> seq, int length, const Vocabulary& vocab) {
    if (static_cast<int>(seq.size()) > length) throw ValidationError("sequence longer than the model length");
    if (static_cast<int>(seq.size()) < length) {
        if (!vocab.pad()) throw ValidationError("vocabulary has no pad token");
        seq.resize(static_cast<std::size_t>(length), *vocab.pad());
    }
    return seq;
}

inline TrainResult train(const std::vector<std::vector<TokenId>>& corpus, const ModelConfig& config,
                         const Vocabulary& vocab, const TrainOptions& opts) {
    config.validate();
    validate_corpus(corpus, config, vocab);
    if (opts.epochs < 1 || opts.batch_size < 1) throw ValidationError("epochs and batch size must be positive");

    DiffusionModel model = DiffusionModel::initialize(config, vocab, opts.seed);
    std::mt19937_64 rng(opts.seed ^ 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_int_distribution<int> pick_t(1, config.timesteps);

    const int l = config.seq_len, d = config.embed_dim, flat = l * d, tf = config.time_features;
    const auto v = static_cast<Eigen::Index>(vocab.size());
    const auto& emb = model.embeddings();
    const auto& sched = model.schedule();
    Denoiser& net = model.mutable_denoiser();

    detail::AdamSlot aw1(net.w1), aw2(net.w2), aw3(net.w3), ab1(net.b1), ab2(net.b2), ab3(net.b3);

    std::vector<std::size_t> order(corpus.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const long batches_per_epoch = static_cast<long>((corpus.size() + static_cast<std::size_t>(opts.batch_size) - 1) /
                                                     static_cast<std::size_t>(opts.batch_size));
    const long total_steps = batches_per_epoch * opts.epochs;
    long step = 0;

    TrainResult result;
    for (int epoch = 0; epoch < opts.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        for (std::size_t begin = 0; begin < order.size(); begin += static_cast<std::size_t>(opts.batch_size)) {
            const auto B = static_cast<Eigen::Index>(std::min(order.size() - begin, static_cast<std::size_t>(opts.batch_size)));
            Eigen::MatrixXd z(flat + tf, B);
            for (Eigen::Index b = 0; b < B; ++b) {
                const auto& seq = corpus[order[begin + static_cast<std::size_t>(b)]];
                const int t = pick_t(rng);
                const double ab = sched.alpha_bar(t);
                for (int k = 0; k < l; ++k)
                    for (int j = 0; j < d; ++j) {
                        const double clean = emb(seq[static_cast<std::size_t>(k)], j);
                        z(k * d + j, b) = std::sqrt(ab) * clean + std::sqrt(1.0 - ab) * normal(rng);
                    }
                z.block(flat, b, tf, 1) = time_embedding(t, config.timesteps, tf);
            }

            // forward
            Eigen::MatrixXd a1 = (net.w1 * z).colwise() + net.b1;
            Eigen::MatrixXd h1 = a1.cwiseMax(0.0);
            Eigen::MatrixXd a2 = (net.w2 * h1).colwise() + net.b2;
            Eigen::MatrixXd h2 = h1 + a2.cwiseMax(0.0);
            Eigen::MatrixXd logits = (net.w3 * h2).colwise() + net.b3;

            // loss and d loss / d logits, one (example, position) at a time
            Eigen::MatrixXd dlogits(logits.rows(), B);
            double loss = 0.0;
            const double mse_scale = 1.0 / (static_cast<double>(flat) * B);
            const double ce_scale = opts.ce_weight / (static_cast<double>(l) * B);
            for (Eigen::Index b = 0; b < B; ++b) {
                const auto& seq = corpus[order[begin + static_cast<std::size_t>(b)]];
                for (int k = 0; k < l; ++k) {
                    auto o = logits.col(b).segment(k * v, v);
                    const double m = o.maxCoeff();
                    Eigen::VectorXd p = (o.array() - m).exp().matrix();
                    const double zsum = p.sum();
                    p /= zsum;
                    const TokenId target = seq[static_cast<std::size_t>(k)];
                    Eigen::VectorXd diff = emb.transpose() * p - emb.row(target).transpose();
                    loss += mse_scale * diff.squaredNorm() + ce_scale * (m + std::log(zsum) - o(target));
                    Eigen::VectorXd dp = emb * (2.0 * mse_scale * diff);
                    Eigen::VectorXd g = (p.array() * (dp.array() - p.dot(dp))).matrix();
                    g += ce_scale * p;
                    g(target) -= ce_scale;
                    dlogits.col(b).segment(k * v, v) = g;
                }
            }
            epoch_loss += loss;

            // backward
            Eigen::MatrixXd gw3 = dlogits * h2.transpose();
            Eigen::VectorXd gb3 = dlogits.rowwise().sum();
            Eigen::MatrixXd dh2 = net.w3.transpose() * dlogits;
            Eigen::MatrixXd da2 = dh2.array() * (a2.array() > 0.0).cast<double>();
            Eigen::MatrixXd gw2 = da2 * h1.transpose();
            Eigen::VectorXd gb2 = da2.rowwise().sum();
            Eigen::MatrixXd dh1 = dh2 + net.w2.transpose() * da2;
            Eigen::MatrixXd da1 = dh1.array() * (a1.array() > 0.0).cast<double>();
            Eigen::MatrixXd gw1 = da1 * z.transpose();
            Eigen::VectorXd gb1 = da1.rowwise().sum();

            ++step;
            const double progress = static_cast<double>(step - 1) / static_cast<double>(std::max(1L, total_steps - 1));
            const double lr = opts.final_learning_rate +
                              0.5 * (opts.learning_rate - opts.final_learning_rate) * (1.0 + std::cos(std::numbers::pi * progress));
            aw1.step(net.w1, gw1, lr, step);
            aw2.step(net.w2, gw2, lr, step);
            aw3.step(net.w3, gw3, lr, step);
            ab1.step(net.b1, gb1, lr, step);
            ab2.step(net.b2, gb2, lr, step);
            ab3.step(net.b3, gb3, lr, step);
        }
        result.epoch_loss.push_back(epoch_loss / static_cast<double>(batches_per_epoch));
    }
    result.model = std::move(model);
    return result;
}

}  // namespace rcdiff

#pragma once

// Binary model checkpoint.
//
// Layout (host byte order): magic "RCDM", u32 version, config block, the
// vocabulary, then embeddings, w1, b1, w2, b2, w3, b3 as raw doubles in
// column-major order. Loading any other version is an error.

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "rcdiff/diffusion.hpp"
#include "rcdiff/error.hpp"

namespace rcdiff {

inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

class ByteWriter {
public:
    template <typename T>
    void put(T v) {
        const auto* p = reinterpret_cast<const char*>(&v);
        out_.append(p, sizeof(T));
    }
    void put_string(std::string_view s) {
        put(static_cast<std::uint32_t>(s.size()));
        out_.append(s);
    }
    void put_matrix(const Eigen::MatrixXd& m) {
        put(static_cast<std::uint32_t>(m.rows()));
        put(static_cast<std::uint32_t>(m.cols()));
        out_.append(reinterpret_cast<const char*>(m.data()), static_cast<std::size_t>(m.size()) * sizeof(double));
    }
    std::string take() { return std::move(out_); }

private:
    std::string out_;
};

class ByteReader {
public:
    explicit ByteReader(std::string_view in) : in_(in) {}

    template <typename T>
    T get() {
        need(sizeof(T));
        T v;
        std::memcpy(&v, in_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }
    std::string get_string() {
        const auto n = get<std::uint32_t>();
        need(n);
        std::string s(in_.substr(pos_, n));
        pos_ += n;
        return s;
    }
    Eigen::MatrixXd get_matrix() {
        const auto rows = get<std::uint32_t>();
        const auto cols = get<std::uint32_t>();
        const std::size_t bytes = static_cast<std::size_t>(rows) * cols * sizeof(double);
        need(bytes);
        Eigen::MatrixXd m(rows, cols);
        std::memcpy(m.data(), in_.data() + pos_, bytes);
        pos_ += bytes;
        return m;
    }
    bool done() const noexcept { return pos_ == in_.size(); }

private:
    void need(std::size_t n) const {
        if (in_.size() - pos_ < n) throw ValidationError("checkpoint is truncated");
    }
    std::string_view in_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string checkpoint_to_bytes(const DiffusionModel& model) {
    detail::ByteWriter w;
    w.put('R'), w.put('C'), w.put('D'), w.put('M');
    w.put(kCheckpointVersion);
    const auto& c = model.config();
    for (int v : {c.seq_len, c.embed_dim, c.hidden, c.timesteps, c.time_features}) w.put(static_cast<std::int32_t>(v));
    for (double v : {c.beta_start, c.beta_end, c.temperature}) w.put(v);
    const auto& vocab = model.vocabulary();
    w.put(static_cast<std::uint32_t>(vocab.size()));
    for (const auto& tok : vocab.tokens()) w.put_string(tok);
    w.put(static_cast<std::int32_t>(vocab.pad() ? *vocab.pad() : -1));
    const auto& n = model.denoiser();
    for (const Eigen::MatrixXd* m : {&model.embeddings(), &n.w1, &n.w2, &n.w3}) w.put_matrix(*m);
    for (const Eigen::VectorXd* v : {&n.b1, &n.b2, &n.b3}) w.put_matrix(*v);
    return w.take();
}

inline DiffusionModel checkpoint_from_bytes(std::string_view bytes) {
    detail::ByteReader r(bytes);
    char magic[4];
    for (char& ch : magic) ch = r.get<char>();
    if (std::string_view(magic, 4) != "RCDM") throw ValidationError("not a model checkpoint");
    if (auto v = r.get<std::uint32_t>(); v != kCheckpointVersion)
        throw ValidationError("unsupported checkpoint version " + std::to_string(v));
    ModelConfig c;
    c.seq_len = r.get<std::int32_t>();
    c.embed_dim = r.get<std::int32_t>();
    c.hidden = r.get<std::int32_t>();
    c.timesteps = r.get<std::int32_t>();
    c.time_features = r.get<std::int32_t>();
    c.beta_start = r.get<double>();
    c.beta_end = r.get<double>();
    c.temperature = r.get<double>();
    const auto count = r.get<std::uint32_t>();
    std::vector<std::string> tokens;
    for (std::uint32_t i = 0; i < count; ++i) tokens.push_back(r.get_string());
    const auto pad = r.get<std::int32_t>();
    Vocabulary vocab(std::move(tokens), pad >= 0 ? std::optional<TokenId>(pad) : std::nullopt);
    Eigen::MatrixXd emb = r.get_matrix();
    Denoiser d;
    d.w1 = r.get_matrix();
    d.w2 = r.get_matrix();
    d.w3 = r.get_matrix();
    d.b1 = r.get_matrix();
    d.b2 = r.get_matrix();
    d.b3 = r.get_matrix();
    if (!r.done()) throw ValidationError("trailing bytes after checkpoint");
    return DiffusionModel(c, std::move(vocab), std::move(emb), std::move(d));
}

inline void save_checkpoint(const DiffusionModel& model, const std::string& path) {
    const std::string bytes = checkpoint_to_bytes(model);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot open '" + path + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ValidationError("failed writing '" + path + "'");
}

inline DiffusionModel load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return checkpoint_from_bytes(ss.str());
}

}  // namespace rcdiff

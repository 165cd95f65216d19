#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hplb/core/rng.hpp"
#include "hplb/env/trajectory.hpp"
#include "hplb/nn/dense.hpp"
#include "hplb/nn/gru.hpp"

namespace hplb::wm {

// Per-feature affine input normalization and the output delta scale. The
// decoder emits a normalized state delta; a zero decoder output therefore
// predicts "no change" exactly.
struct Normalization {
    Eigen::VectorXd state_mean, state_scale;
    Eigen::VectorXd action_mean, action_scale;
    Eigen::VectorXd delta_scale;

    void validate() const {
        if ((state_scale.array() <= 0.0).any() || (action_scale.array() <= 0.0).any() ||
            (delta_scale.array() <= 0.0).any()) {
            throw std::invalid_argument("normalization: scales must be strictly positive");
        }
    }
};

inline Normalization compute_normalization(const std::vector<env::Trajectory>& dataset) {
    if (dataset.empty()) throw std::invalid_argument("normalization: empty dataset");
    const Eigen::Index sd = dataset[0].states[0].size();
    const Eigen::Index ad = dataset[0].actions[0].size();
    Eigen::VectorXd s_sum = Eigen::VectorXd::Zero(sd), s_sq = Eigen::VectorXd::Zero(sd);
    Eigen::VectorXd a_sum = Eigen::VectorXd::Zero(ad), a_sq = Eigen::VectorXd::Zero(ad);
    Eigen::VectorXd d_sq = Eigen::VectorXd::Zero(sd);
    double ns = 0.0, na = 0.0, nd = 0.0;
    for (const auto& t : dataset) {
        for (const auto& s : t.states) {
            s_sum += s;
            s_sq += s.cwiseProduct(s);
            ns += 1.0;
        }
        for (const auto& a : t.actions) {
            a_sum += a;
            a_sq += a.cwiseProduct(a);
            na += 1.0;
        }
        for (std::size_t k = 0; k + 1 < t.states.size(); ++k) {
            const Eigen::VectorXd d = t.states[k + 1] - t.states[k];
            d_sq += d.cwiseProduct(d);
            nd += 1.0;
        }
    }
    const double floor = 1e-8;
    Normalization n;
    n.state_mean = s_sum / ns;
    n.state_scale = (s_sq / ns - n.state_mean.cwiseProduct(n.state_mean))
                        .cwiseMax(0.0)
                        .cwiseSqrt()
                        .cwiseMax(floor);
    n.action_mean = a_sum / na;
    n.action_scale = (a_sq / na - n.action_mean.cwiseProduct(n.action_mean))
                         .cwiseMax(0.0)
                         .cwiseSqrt()
                         .cwiseMax(floor);
    // deltas are scaled only, not centered, so a zero network output means a
    // zero predicted change
    n.delta_scale = (d_sq / nd).cwiseSqrt().cwiseMax(floor);
    return n;
}

struct WorldModelArch {
    std::size_t state_dim = 0;
    std::size_t action_dim = 0;
    std::size_t memory = 32;
    // encoder dims after the input layer; the last entry is the encoding fed
    // to the GRU and the skip connection
    std::vector<std::size_t> encoder_layers = {64, 64};
    std::vector<std::size_t> decoder_hidden = {64, 64};
};

// Recurrent one-step predictor: an encoder MLP feeds a GRU whose memory is
// the learned trajectory representation, and a decoder MLP reads the updated
// memory together with a skip connection from the encoder output.
class WorldModel {
public:
    WorldModel() = default;

    WorldModel(const WorldModelArch& arch, Normalization norm)
        : arch_(arch), norm_(std::move(norm)) {
        norm_.validate();
        if (arch.encoder_layers.empty()) {
            throw std::invalid_argument("world model: encoder needs at least one layer");
        }
        std::vector<std::size_t> enc_hidden(arch.encoder_layers.begin(),
                                            arch.encoder_layers.end() - 1);
        encoder_ = nn::DenseNet::mlp(arch.state_dim + arch.action_dim, enc_hidden,
                                     arch.encoder_layers.back());
        gru_ = nn::GruCell(arch.encoder_layers.back(), arch.memory);
        decoder_ = nn::DenseNet::mlp(arch.memory + arch.encoder_layers.back(),
                                     arch.decoder_hidden, arch.state_dim);
    }

    void init_params(Rng& rng) {
        encoder_.init_uniform(rng);
        gru_.init_uniform(rng);
        decoder_.init_uniform(rng);
    }

    const WorldModelArch& arch() const { return arch_; }
    const Normalization& normalization() const { return norm_; }
    std::size_t state_dim() const { return arch_.state_dim; }
    std::size_t action_dim() const { return arch_.action_dim; }
    std::size_t memory_dim() const { return arch_.memory; }
    std::size_t encoding_dim() const { return arch_.encoder_layers.back(); }

    const nn::DenseNet& encoder() const { return encoder_; }
    const nn::GruCell& gru() const { return gru_; }
    const nn::DenseNet& decoder() const { return decoder_; }
    nn::DenseNet& encoder() { return encoder_; }
    nn::GruCell& gru() { return gru_; }
    nn::DenseNet& decoder() { return decoder_; }

    Eigen::VectorXd zero_memory() const {
        return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(arch_.memory));
    }

    void normalized_input_into(const Eigen::VectorXd& s, const Eigen::VectorXd& a,
                               Eigen::VectorXd& x) const {
        x.resize(s.size() + a.size());
        x.head(s.size()) = (s - norm_.state_mean).cwiseQuotient(norm_.state_scale);
        x.tail(a.size()) = (a - norm_.action_mean).cwiseQuotient(norm_.action_scale);
    }

    Eigen::VectorXd normalized_input(const Eigen::VectorXd& s, const Eigen::VectorXd& a) const {
        Eigen::VectorXd x;
        normalized_input_into(s, a, x);
        return x;
    }

    struct StepResult {
        Eigen::VectorXd prediction;
        Eigen::VectorXd memory;
    };

    // One-step prediction: consumes (s_t, a_t, h_t), returns the predicted
    // next state and the updated memory. Pure; safe to call concurrently.
    StepResult forward(const Eigen::VectorXd& s, const Eigen::VectorXd& a,
                       const Eigen::VectorXd& h) const {
        check_input(s, a, h);
        nn::DenseNet::Cache enc_cache, dec_cache;
        nn::GruCell::Cache gru_cache;
        const Eigen::VectorXd& e = encoder_.forward(normalized_input(s, a), enc_cache);
        if (!e.allFinite()) throw std::runtime_error("world model: encoder output non-finite");
        const Eigen::VectorXd& h_next = gru_.step(e, h, gru_cache);
        if (!h_next.allFinite()) throw std::runtime_error("world model: GRU output non-finite");
        Eigen::VectorXd dec_in(h_next.size() + e.size());
        dec_in << h_next, e;
        const Eigen::VectorXd& delta = decoder_.forward(dec_in, dec_cache);
        if (!delta.allFinite()) throw std::runtime_error("world model: decoder output non-finite");
        StepResult out;
        out.prediction = s + delta.cwiseProduct(norm_.delta_scale);
        out.memory = h_next;
        return out;
    }

    std::size_t param_count() const {
        return encoder_.param_count() + gru_.param_count() + decoder_.param_count();
    }

    // Flat order: encoder, GRU, decoder.
    void copy_params_to(std::span<double> out) const {
        encoder_.copy_params_to(out.subspan(0, encoder_.param_count()));
        gru_.copy_params_to(out.subspan(encoder_.param_count(), gru_.param_count()));
        decoder_.copy_params_to(
            out.subspan(encoder_.param_count() + gru_.param_count(), decoder_.param_count()));
    }

    void copy_params_from(std::span<const double> in) {
        encoder_.copy_params_from(in.subspan(0, encoder_.param_count()));
        gru_.copy_params_from(in.subspan(encoder_.param_count(), gru_.param_count()));
        decoder_.copy_params_from(
            in.subspan(encoder_.param_count() + gru_.param_count(), decoder_.param_count()));
    }

private:
    void check_input(const Eigen::VectorXd& s, const Eigen::VectorXd& a,
                     const Eigen::VectorXd& h) const {
        if (static_cast<std::size_t>(s.size()) != arch_.state_dim ||
            static_cast<std::size_t>(a.size()) != arch_.action_dim ||
            static_cast<std::size_t>(h.size()) != arch_.memory) {
            throw std::invalid_argument(
                "world model: input dims (" + std::to_string(s.size()) + ", " +
                std::to_string(a.size()) + ", " + std::to_string(h.size()) + "), expected (" +
                std::to_string(arch_.state_dim) + ", " + std::to_string(arch_.action_dim) +
                ", " + std::to_string(arch_.memory) + ")");
        }
        if (!s.allFinite() || !a.allFinite() || !h.allFinite()) {
            throw std::invalid_argument("world model: non-finite input");
        }
    }

    WorldModelArch arch_;
    Normalization norm_;
    nn::DenseNet encoder_;
    nn::GruCell gru_;
    nn::DenseNet decoder_;
};

}  // namespace hplb::wm

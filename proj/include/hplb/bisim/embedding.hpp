#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hplb/bisim/distance.hpp"
#include "hplb/core/json_io.hpp"
#include "hplb/core/rng.hpp"
#include "hplb/nn/dense.hpp"
#include "hplb/nn/loss.hpp"
#include "hplb/nn/optim.hpp"
#include "hplb/nn/serialize.hpp"

namespace hplb::bisim {

// Maps memory vectors into a k-dimensional space whose L1 distances
// reproduce the behavioral distance matrix.
struct EmbeddingModel {
    nn::DenseNet net;

    std::size_t output_dim() const { return net.output_dim(); }
};

inline Eigen::VectorXd embed(const EmbeddingModel& model, const Eigen::VectorXd& h) {
    nn::DenseNet::Cache cache;
    return model.net.forward(h, cache);
}

struct EmbeddingTrainConfig {
    std::size_t dim = 8;
    std::vector<std::size_t> hidden = {64, 64};
    std::size_t epochs = 500;
    std::size_t minibatches_per_epoch = 8;
    std::size_t pair_batch = 1024;
    double lr = 1e-3;
    // final lr as a fraction of the initial one, on a cosine schedule; the
    // absolute-stress objective needs a small final step size to settle at
    // the scale of the smallest distances
    double lr_decay = 1e-3;
    double holdout_fraction = 0.1;
    std::uint64_t seed = 0;
};

struct EmbeddingTrainResult {
    EmbeddingModel model;
    double train_stress = 0.0;    // mean |embedded distance - target| on training pairs
    double holdout_stress = 0.0;  // same on the held-out pairs
    double holdout_mean_distance = 0.0;
    std::size_t holdout_pairs = 0;
    std::vector<double> trace;  // per-epoch mean minibatch loss
};

namespace detail {

inline double mean_stress(const EmbeddingModel& model, const DistanceDataset& data,
                          const std::vector<std::pair<std::uint32_t, std::uint32_t>>& pairs) {
    if (pairs.empty()) return 0.0;
    std::vector<Eigen::VectorXd> e(data.memories.size());
    nn::DenseNet::Cache cache;
    for (std::size_t i = 0; i < data.memories.size(); ++i) {
        e[i] = model.net.forward(data.memories[i].h, cache);
    }
    double sum = 0.0;
    for (const auto& [i, j] : pairs) {
        const double de = (e[i] - e[j]).cwiseAbs().sum();
        sum += std::abs(de - data.d(i, j));
    }
    return sum / static_cast<double>(pairs.size());
}

}  // namespace detail

// Absolute-stress metric embedding trained with Adam over resampled pair
// minibatches; a random 10% of pairs is held out for the reported stress.
inline EmbeddingTrainResult train_embedding(const DistanceDataset& data,
                                            const EmbeddingTrainConfig& cfg) {
    const std::size_t n = data.memories.size();
    if (n < 2) throw std::invalid_argument("embedding: need at least two memories");
    if (cfg.dim < 1) throw std::invalid_argument("embedding: dimension must be positive");

    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
    pairs.reserve(n * (n - 1) / 2);
    for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    }
    Rng rng(derive_seed(cfg.seed, 0x456d62));
    rng.shuffle(pairs);
    const std::size_t holdout =
        static_cast<std::size_t>(cfg.holdout_fraction * static_cast<double>(pairs.size()));
    std::vector<std::pair<std::uint32_t, std::uint32_t>> holdout_pairs(
        pairs.begin(), pairs.begin() + static_cast<std::ptrdiff_t>(holdout));
    std::vector<std::pair<std::uint32_t, std::uint32_t>> train_pairs(
        pairs.begin() + static_cast<std::ptrdiff_t>(holdout), pairs.end());
    if (train_pairs.empty()) {
        throw std::invalid_argument("embedding: no training pairs left after holdout");
    }

    EmbeddingTrainResult res;
    const std::size_t mem_dim = static_cast<std::size_t>(data.memories[0].h.size());
    res.model.net = nn::DenseNet::mlp(mem_dim, cfg.hidden, cfg.dim);
    res.model.net.init_uniform(rng);

    // Optimize against mean-normalized targets so the net works at O(1)
    // scale whatever the raw distance magnitudes, then fold the scale back
    // into the identity output layer; L1 embedding distances scale linearly,
    // so the objective is unchanged.
    double target_scale = 0.0;
    for (const auto& [i, j] : train_pairs) target_scale += data.d(i, j);
    target_scale /= static_cast<double>(train_pairs.size());
    if (!(target_scale > 0.0)) target_scale = 1.0;

    nn::ParamVector params(static_cast<Eigen::Index>(res.model.net.param_count()));
    res.model.net.copy_params_to(
        std::span<double>(params.values.data(), static_cast<std::size_t>(params.values.size())));
    nn::AdamConfig adam{cfg.lr, 0.9, 0.999, 1e-8};

    std::vector<nn::DenseNet::Cache> caches(n);
    std::vector<Eigen::VectorXd> emb(n);
    std::vector<Eigen::VectorXd> emb_grad(n,
                                          Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cfg.dim)));
    std::vector<char> touched(n, 0);
    nn::DenseNet::Grad grad;
    std::vector<double> flat(res.model.net.param_count());

    const double total_steps =
        static_cast<double>(cfg.epochs) * static_cast<double>(cfg.minibatches_per_epoch);
    std::size_t step_index = 0;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        double epoch_loss = 0.0;
        for (std::size_t mb = 0; mb < cfg.minibatches_per_epoch; ++mb, ++step_index) {
            const double progress = static_cast<double>(step_index) / total_steps;
            adam.lr = cfg.lr * (cfg.lr_decay + (1.0 - cfg.lr_decay) * 0.5 *
                                                   (1.0 + std::cos(progress * std::numbers::pi)));
            for (std::size_t i = 0; i < n; ++i) {
                emb[i] = res.model.net.forward(data.memories[i].h, caches[i]);
                emb_grad[i].setZero();
                touched[i] = 0;
            }
            double batch_loss = 0.0;
            for (std::size_t s = 0; s < cfg.pair_batch; ++s) {
                const auto& [i, j] = train_pairs[rng.uniform_int(train_pairs.size())];
                const Eigen::VectorXd u = emb[i] - emb[j];
                const double de = u.cwiseAbs().sum();
                const double rho = de - data.d(i, j) / target_scale;
                batch_loss += std::abs(rho);
                const double g = nn::sign0(rho);
                for (Eigen::Index k = 0; k < u.size(); ++k) {
                    const double gk = g * nn::sign0(u(k));
                    emb_grad[i](k) += gk;
                    emb_grad[j](k) -= gk;
                }
                touched[i] = touched[j] = 1;
            }
            batch_loss /= static_cast<double>(cfg.pair_batch);
            if (!std::isfinite(batch_loss)) {
                throw std::runtime_error("embedding: non-finite loss at epoch " +
                                         std::to_string(epoch));
            }
            epoch_loss += batch_loss;

            res.model.net.ensure_grad_shape(grad);
            for (auto& m : grad.w) m.setZero();
            for (auto& v : grad.b) v.setZero();
            const double scale = 1.0 / static_cast<double>(cfg.pair_batch);
            for (std::size_t i = 0; i < n; ++i) {
                if (!touched[i]) continue;
                res.model.net.backward(caches[i], emb_grad[i] * scale, grad);
            }
            nn::DenseNet::copy_grad_to(grad, flat);
            for (Eigen::Index k = 0; k < params.size(); ++k) params.grad(k) = flat[static_cast<std::size_t>(k)];
            nn::adam_step(params, adam);
            res.model.net.copy_params_from(std::span<const double>(
                params.values.data(), static_cast<std::size_t>(params.values.size())));
        }
        res.trace.push_back(epoch_loss / static_cast<double>(cfg.minibatches_per_epoch));
    }

    auto& out_layer = res.model.net.layers().back();
    if (out_layer.act != nn::Activation::Identity) {
        throw std::logic_error("embedding: output layer must be identity to fold the scale");
    }
    out_layer.w *= target_scale;
    out_layer.b *= target_scale;

    res.train_stress = detail::mean_stress(res.model, data, train_pairs);
    res.holdout_pairs = holdout_pairs.size();
    if (holdout_pairs.empty()) {
        res.holdout_stress = res.train_stress;
        res.holdout_mean_distance = 0.0;
    } else {
        res.holdout_stress = detail::mean_stress(res.model, data, holdout_pairs);
        double sum = 0.0;
        for (const auto& [i, j] : holdout_pairs) sum += data.d(i, j);
        res.holdout_mean_distance = sum / static_cast<double>(holdout_pairs.size());
    }
    return res;
}

inline void save_embedding(const EmbeddingModel& model, const std::string& path,
                           double train_stress, double holdout_stress) {
    nlohmann::json j;
    j["format"] = "hplb.embedding";
    j["version"] = 1;
    j["net"] = nn::dense_to_json(model.net);
    j["train_stress"] = train_stress;
    j["holdout_stress"] = holdout_stress;
    save_json_file(j, path);
}

inline EmbeddingModel load_embedding(const std::string& path) {
    const auto j = load_json_file(path);
    if (j.value("format", "") != "hplb.embedding") {
        throw std::runtime_error("embedding: " + path + " is not an embedding checkpoint");
    }
    EmbeddingModel model;
    model.net = nn::dense_from_json(j.at("net"));
    return model;
}

}  // namespace hplb::bisim

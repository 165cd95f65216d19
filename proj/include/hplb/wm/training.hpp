#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hplb/core/rng.hpp"
#include "hplb/core/thread_pool.hpp"
#include "hplb/nn/optim.hpp"
#include "hplb/wm/bptt.hpp"
#include "hplb/wm/world_model.hpp"

namespace hplb::wm {

struct TrainConfig {
    std::size_t epochs = 200;
    std::size_t batch_size = 16;
    double lr = 1e-3;
    std::size_t memory = 32;
    std::vector<std::size_t> encoder_layers = {64, 64};
    std::vector<std::size_t> decoder_hidden = {64, 64};
    std::uint64_t seed = 0;
    TrainMode mode = TrainMode::Standard;

    void validate() const {
        if (epochs == 0 || batch_size == 0 || memory == 0 || !(lr > 0.0)) {
            throw std::invalid_argument("train config: epochs, batch, memory, lr must be positive");
        }
    }
};

// Uniformly random bijection on {0, ..., T}, resampled per trajectory per
// epoch during time-invariant training.
inline std::vector<std::size_t> sample_permutation(std::size_t T, Rng& rng) {
    if (T < 1) throw std::invalid_argument("sample_permutation: T must be >= 1");
    return rng.permutation(T + 1);
}

struct TrainResult {
    WorldModel model;
    std::vector<double> loss_trace;  // per-epoch mean of the optimized objective
};

namespace detail {

// salts for the independent random streams of a training run
constexpr std::uint64_t kInitStream = 0x696e6974;   // parameter init
constexpr std::uint64_t kOrderStream = 0x6f726465;  // epoch shuffling
constexpr std::uint64_t kPermStream = 0x7065726d;   // memory permutations

inline void check_dataset(const std::vector<env::Trajectory>& dataset) {
    if (dataset.empty()) throw std::invalid_argument("train: empty dataset");
    const Eigen::Index sd = dataset[0].states[0].size();
    const Eigen::Index ad = dataset[0].actions[0].size();
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const auto& t = dataset[i];
        if (t.length() < 2) {
            throw std::invalid_argument("train: trajectory " + std::to_string(i) +
                                        " shorter than 2 steps");
        }
        if (t.states[0].size() != sd || t.actions[0].size() != ad) {
            throw std::invalid_argument("train: trajectory " + std::to_string(i) +
                                        " has mismatched state/action dimensions");
        }
    }
}

}  // namespace detail

// Minimizes the mean per-trajectory prediction loss with Adam over shuffled
// minibatches of whole trajectories (full backpropagation through time).
// Per-trajectory gradients are computed into per-slot buffers and reduced in
// slot order, so results are bit-identical for any thread count.
inline TrainResult train_world_model(const std::vector<env::Trajectory>& dataset,
                                     const TrainConfig& cfg, ThreadPool& pool) {
    cfg.validate();
    detail::check_dataset(dataset);

    WorldModelArch arch;
    arch.state_dim = static_cast<std::size_t>(dataset[0].states[0].size());
    arch.action_dim = static_cast<std::size_t>(dataset[0].actions[0].size());
    arch.memory = cfg.memory;
    arch.encoder_layers = cfg.encoder_layers;
    arch.decoder_hidden = cfg.decoder_hidden;

    TrainResult res{WorldModel(arch, compute_normalization(dataset)), {}};
    WorldModel& model = res.model;
    Rng init_rng(derive_seed(cfg.seed, detail::kInitStream));
    model.init_params(init_rng);

    nn::ParamVector params(static_cast<Eigen::Index>(model.param_count()));
    model.copy_params_to(std::span<double>(params.values.data(),
                                           static_cast<std::size_t>(params.values.size())));
    nn::AdamConfig adam{cfg.lr, 0.9, 0.999, 1e-8};

    const std::size_t n = dataset.size();
    const std::size_t slots = std::min(cfg.batch_size, n);
    std::vector<BpttWorkspace> ws(slots);
    std::vector<ModelGrad> grads(slots);
    std::vector<std::vector<std::size_t>> perms(slots);
    std::vector<double> slot_loss(slots, 0.0);
    Eigen::VectorXd flat(params.size());

    for (std::size_t e = 0; e < cfg.epochs; ++e) {
        Rng order_rng(derive_seed(cfg.seed, detail::kOrderStream, e));
        const auto order = order_rng.permutation(n);
        double epoch_loss = 0.0;

        for (std::size_t start = 0; start < n; start += slots) {
            const std::size_t count = std::min(slots, n - start);
            pool.parallel_for(count, [&](std::size_t b) {
                const std::size_t idx = order[start + b];
                const auto& traj = dataset[idx];
                if (cfg.mode == TrainMode::TimeInvariant) {
                    Rng perm_rng(derive_seed(derive_seed(cfg.seed, detail::kPermStream), e, idx));
                    perms[b] = sample_permutation(traj.length(), perm_rng);
                }
                grads[b].zero();
                const auto losses = bptt_forward(model, traj, cfg.mode, perms[b], ws[b]);
                slot_loss[b] = losses.total(cfg.mode);
                bptt_backward(model, traj, cfg.mode, perms[b], ws[b], grads[b],
                              1.0 / static_cast<double>(count));
            });

            params.zero_grad();
            for (std::size_t b = 0; b < count; ++b) {
                if (!std::isfinite(slot_loss[b])) {
                    throw std::runtime_error(
                        "train: non-finite loss on trajectory " + std::to_string(order[start + b]) +
                        " (epoch " + std::to_string(e) + ")");
                }
                epoch_loss += slot_loss[b];
                copy_model_grad_to(model, grads[b],
                                   std::span<double>(flat.data(),
                                                     static_cast<std::size_t>(flat.size())));
                params.grad += flat;
            }
            nn::adam_step(params, adam);
            model.copy_params_from(std::span<const double>(
                params.values.data(), static_cast<std::size_t>(params.values.size())));
        }
        res.loss_trace.push_back(epoch_loss / static_cast<double>(n));
    }
    return res;
}

}  // namespace hplb::wm

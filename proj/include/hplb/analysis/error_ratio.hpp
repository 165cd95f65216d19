#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hplb/core/csv.hpp"
#include "hplb/core/json_io.hpp"
#include "hplb/core/rng.hpp"
#include "hplb/core/thread_pool.hpp"
#include "hplb/env/trajectory.hpp"
#include "hplb/nn/loss.hpp"
#include "hplb/nn/optim.hpp"
#include "hplb/nn/serialize.hpp"
#include "hplb/wm/checkpoint.hpp"
#include "hplb/wm/training.hpp"
#include "hplb/wm/world_model.hpp"

namespace hplb::analysis {

// Memoryless one-step predictor: the world model's encoder/decoder stack
// without the GRU. Whatever this model cannot predict but the recurrent one
// can is attributable to information carried in memory.
class StatelessModel {
public:
    StatelessModel() = default;

    StatelessModel(std::size_t state_dim, std::size_t action_dim,
                   const std::vector<std::size_t>& encoder_layers,
                   const std::vector<std::size_t>& decoder_hidden, wm::Normalization norm)
        : norm_(std::move(norm)) {
        norm_.validate();
        std::vector<std::size_t> enc_hidden(encoder_layers.begin(), encoder_layers.end() - 1);
        encoder_ = nn::DenseNet::mlp(state_dim + action_dim, enc_hidden, encoder_layers.back());
        decoder_ = nn::DenseNet::mlp(encoder_layers.back(), decoder_hidden, state_dim);
    }

    const wm::Normalization& normalization() const { return norm_; }
    nn::DenseNet& encoder() { return encoder_; }
    nn::DenseNet& decoder() { return decoder_; }
    const nn::DenseNet& encoder() const { return encoder_; }
    const nn::DenseNet& decoder() const { return decoder_; }

    void init_params(Rng& rng) {
        encoder_.init_uniform(rng);
        decoder_.init_uniform(rng);
    }

    std::size_t param_count() const { return encoder_.param_count() + decoder_.param_count(); }

    void copy_params_to(std::span<double> out) const {
        encoder_.copy_params_to(out.subspan(0, encoder_.param_count()));
        decoder_.copy_params_to(out.subspan(encoder_.param_count(), decoder_.param_count()));
    }

    void copy_params_from(std::span<const double> in) {
        encoder_.copy_params_from(in.subspan(0, encoder_.param_count()));
        decoder_.copy_params_from(in.subspan(encoder_.param_count(), decoder_.param_count()));
    }

    Eigen::VectorXd predict(const Eigen::VectorXd& s, const Eigen::VectorXd& a) const {
        nn::DenseNet::Cache enc_cache, dec_cache;
        Eigen::VectorXd x(s.size() + a.size());
        x.head(s.size()) = (s - norm_.state_mean).cwiseQuotient(norm_.state_scale);
        x.tail(a.size()) = (a - norm_.action_mean).cwiseQuotient(norm_.action_scale);
        const Eigen::VectorXd& e = encoder_.forward(x, enc_cache);
        const Eigen::VectorXd& delta = decoder_.forward(e, dec_cache);
        return s + delta.cwiseProduct(norm_.delta_scale);
    }

private:
    wm::Normalization norm_;
    nn::DenseNet encoder_;
    nn::DenseNet decoder_;
};

// Trains the stateless baseline with the same budget and loop structure as
// the recurrent model: whole-trajectory losses, minibatches of trajectories,
// Adam per batch, slot-ordered reduction for thread-count independence.
inline StatelessModel train_stateless_model(const std::vector<env::Trajectory>& dataset,
                                            const wm::TrainConfig& cfg, ThreadPool& pool) {
    cfg.validate();
    if (dataset.empty()) throw std::invalid_argument("stateless: empty dataset");

    StatelessModel model(static_cast<std::size_t>(dataset[0].states[0].size()),
                         static_cast<std::size_t>(dataset[0].actions[0].size()),
                         cfg.encoder_layers, cfg.decoder_hidden,
                         wm::compute_normalization(dataset));
    Rng init_rng(derive_seed(cfg.seed, wm::detail::kInitStream));
    model.init_params(init_rng);

    nn::ParamVector params(static_cast<Eigen::Index>(model.param_count()));
    model.copy_params_to(
        std::span<double>(params.values.data(), static_cast<std::size_t>(params.values.size())));
    nn::AdamConfig adam{cfg.lr, 0.9, 0.999, 1e-8};

    struct Slot {
        nn::DenseNet::Grad enc_grad, dec_grad;
        nn::DenseNet::Cache enc_cache, dec_cache;
        double loss = 0.0;
    };
    const std::size_t n = dataset.size();
    const std::size_t slots_count = std::min(cfg.batch_size, n);
    std::vector<Slot> slots(slots_count);
    Eigen::VectorXd flat(params.size());
    const auto& norm = model.normalization();

    for (std::size_t e = 0; e < cfg.epochs; ++e) {
        Rng order_rng(derive_seed(cfg.seed, wm::detail::kOrderStream, e));
        const auto order = order_rng.permutation(n);
        for (std::size_t start = 0; start < n; start += slots_count) {
            const std::size_t count = std::min(slots_count, n - start);
            pool.parallel_for(count, [&](std::size_t b) {
                Slot& slot = slots[b];
                model.encoder().ensure_grad_shape(slot.enc_grad);
                model.decoder().ensure_grad_shape(slot.dec_grad);
                for (auto& m : slot.enc_grad.w) m.setZero();
                for (auto& v : slot.enc_grad.b) v.setZero();
                for (auto& m : slot.dec_grad.w) m.setZero();
                for (auto& v : slot.dec_grad.b) v.setZero();

                const auto& traj = dataset[order[start + b]];
                const std::size_t loss_terms = traj.length() - 1;
                const double w = 1.0 / (static_cast<double>(count) *
                                        static_cast<double>(loss_terms));
                double loss = 0.0;
                Eigen::VectorXd x, dpred;
                for (std::size_t t = 0; t < loss_terms; ++t) {
                    const auto& s = traj.states[t];
                    const auto& target = traj.states[t + 1];
                    x.resize(s.size() + traj.actions[t].size());
                    x.head(s.size()) = (s - norm.state_mean).cwiseQuotient(norm.state_scale);
                    x.tail(traj.actions[t].size()) =
                        (traj.actions[t] - norm.action_mean).cwiseQuotient(norm.action_scale);
                    const Eigen::VectorXd& enc = model.encoder().forward(x, slot.enc_cache);
                    const Eigen::VectorXd& delta = model.decoder().forward(enc, slot.dec_cache);
                    Eigen::VectorXd pred = s + delta.cwiseProduct(norm.delta_scale);
                    loss += (pred - target).cwiseAbs().mean();
                    dpred.resize(pred.size());
                    for (Eigen::Index i = 0; i < pred.size(); ++i) {
                        dpred(i) = nn::sign0(pred(i) - target(i)) * w /
                                   static_cast<double>(pred.size()) * norm.delta_scale(i);
                    }
                    Eigen::VectorXd d_enc =
                        model.decoder().backward(slot.dec_cache, dpred, slot.dec_grad);
                    model.encoder().backward(slot.enc_cache, d_enc, slot.enc_grad);
                }
                slot.loss = loss / static_cast<double>(loss_terms);
            });

            params.zero_grad();
            for (std::size_t b = 0; b < count; ++b) {
                if (!std::isfinite(slots[b].loss)) {
                    throw std::runtime_error("stateless: non-finite loss on trajectory " +
                                             std::to_string(order[start + b]));
                }
                const std::size_t ne = model.encoder().param_count();
                nn::DenseNet::copy_grad_to(slots[b].enc_grad,
                                           std::span<double>(flat.data(), ne));
                nn::DenseNet::copy_grad_to(
                    slots[b].dec_grad,
                    std::span<double>(flat.data() + ne, model.decoder().param_count()));
                params.grad += flat;
            }
            nn::adam_step(params, adam);
            model.copy_params_from(std::span<const double>(
                params.values.data(), static_cast<std::size_t>(params.values.size())));
        }
    }
    return model;
}

struct ErrorRatioRow {
    std::string feature;
    double stateless_error = 0.0;
    double stateful_error = 0.0;
    double ratio = 0.0;     // stateless / stateful; > 1 means memory helps
    bool saturated = false; // stateful error exactly zero
};

struct ErrorRatioTable {
    std::vector<ErrorRatioRow> rows;

    // index of the largest well-defined ratio
    std::size_t max_ratio_index() const {
        std::size_t best = rows.size();
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].saturated) continue;
            if (best == rows.size() || rows[i].ratio > rows[best].ratio) best = i;
        }
        if (best == rows.size()) throw std::runtime_error("error ratio: all rows saturated");
        return best;
    }
};

// Per-feature mean absolute one-step prediction error of both models on a
// held-out dataset, and their ratio. The stateful model is teacher-forced
// along each trajectory.
inline ErrorRatioTable error_ratio_table(const std::vector<env::Trajectory>& dataset,
                                         const wm::WorldModel& stateful,
                                         const StatelessModel& stateless,
                                         const std::vector<std::string>& feature_names,
                                         std::size_t report_dim) {
    if (dataset.empty()) throw std::invalid_argument("error ratio: empty dataset");
    const auto sd = static_cast<Eigen::Index>(stateful.state_dim());
    Eigen::VectorXd err_stateful = Eigen::VectorXd::Zero(sd);
    Eigen::VectorXd err_stateless = Eigen::VectorXd::Zero(sd);
    double terms = 0.0;
    for (const auto& traj : dataset) {
        Eigen::VectorXd h = stateful.zero_memory();
        const std::size_t loss_terms = traj.length() - 1;
        for (std::size_t t = 0; t < loss_terms; ++t) {
            auto step = stateful.forward(traj.states[t], traj.actions[t], h);
            err_stateful += (step.prediction - traj.states[t + 1]).cwiseAbs();
            err_stateless +=
                (stateless.predict(traj.states[t], traj.actions[t]) - traj.states[t + 1])
                    .cwiseAbs();
            terms += 1.0;
            h = step.memory;
        }
    }
    err_stateful /= terms;
    err_stateless /= terms;

    ErrorRatioTable table;
    for (std::size_t f = 0; f < report_dim; ++f) {
        ErrorRatioRow row;
        row.feature = f < feature_names.size() ? feature_names[f] : "f" + std::to_string(f);
        row.stateful_error = err_stateful(static_cast<Eigen::Index>(f));
        row.stateless_error = err_stateless(static_cast<Eigen::Index>(f));
        if (row.stateful_error == 0.0) {
            row.saturated = true;
        } else {
            row.ratio = row.stateless_error / row.stateful_error;
        }
        table.rows.push_back(row);
    }
    return table;
}

inline void save_error_ratio_csv(const ErrorRatioTable& table, const std::string& path) {
    CsvWriter csv(path, {"feature", "stateless_error", "stateful_error", "ratio", "flag"});
    for (const auto& row : table.rows) {
        csv.write_row({row.feature, CsvWriter::num(row.stateless_error),
                       CsvWriter::num(row.stateful_error),
                       row.saturated ? "" : CsvWriter::num(row.ratio),
                       row.saturated ? "saturated" : "ok"});
    }
}

inline void save_stateless_model(const StatelessModel& model, const std::string& path) {
    nlohmann::json j;
    j["format"] = "hplb.stateless";
    j["version"] = 1;
    j["encoder"] = nn::dense_to_json(model.encoder());
    j["decoder"] = nn::dense_to_json(model.decoder());
    j["normalization"] = wm::normalization_to_json(model.normalization());
    save_json_file(j, path);
}

}  // namespace hplb::analysis

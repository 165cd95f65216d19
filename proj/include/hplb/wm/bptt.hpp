#pragma once

#include <Eigen/Dense>

#include <span>
#include <stdexcept>
#include <vector>

#include "hplb/env/trajectory.hpp"
#include "hplb/nn/loss.hpp"
#include "hplb/wm/world_model.hpp"

namespace hplb::wm {

enum class TrainMode { Standard, TimeInvariant };

inline const char* train_mode_name(TrainMode m) {
    return m == TrainMode::Standard ? "standard" : "time-invariant";
}

inline TrainMode train_mode_from_name(const std::string& name) {
    if (name == "standard") return TrainMode::Standard;
    if (name == "time-invariant") return TrainMode::TimeInvariant;
    throw std::invalid_argument("unknown training mode '" + name + "'");
}

struct ModelGrad {
    nn::DenseNet::Grad encoder;
    nn::GruCell::Grad gru;
    nn::DenseNet::Grad decoder;

    void zero() {
        for (auto& m : encoder.w) m.setZero();
        for (auto& v : encoder.b) v.setZero();
        for (auto& m : decoder.w) m.setZero();
        for (auto& v : decoder.b) v.setZero();
        if (gru.shaped) {
            gru.wz.setZero(); gru.wr.setZero(); gru.wc.setZero();
            gru.uz.setZero(); gru.ur.setZero(); gru.uc.setZero();
            gru.bz.setZero(); gru.br.setZero(); gru.bc.setZero();
        }
    }
};

inline void copy_model_grad_to(const WorldModel& model, const ModelGrad& grad,
                               std::span<double> out) {
    const std::size_t ne = model.encoder().param_count();
    const std::size_t ng = model.gru().param_count();
    nn::DenseNet::copy_grad_to(grad.encoder, out.subspan(0, ne));
    nn::GruCell::copy_grad_to(grad.gru, out.subspan(ne, ng));
    nn::DenseNet::copy_grad_to(grad.decoder, out.subspan(ne + ng, model.decoder().param_count()));
}

// Reusable per-trajectory buffers for backpropagation through time. Memory
// chain: h[0] = 0, h[t+1] = gru(e_t, h[t]). Predictions exist for
// t = 0..T-2 (the last state is never a target). In time-invariant mode a
// second prediction per step reuses the memory from a permuted time index,
// through a one-off GRU evaluation that does not write back into the chain.
struct BpttWorkspace {
    std::vector<nn::DenseNet::Cache> enc;
    std::vector<nn::GruCell::Cache> gru;
    std::vector<nn::DenseNet::Cache> dec;
    std::vector<nn::GruCell::Cache> gru_alt;
    std::vector<nn::DenseNet::Cache> dec_alt;
    std::vector<Eigen::VectorXd> h;
    std::vector<Eigen::VectorXd> pred;
    std::vector<Eigen::VectorXd> pred_alt;
    std::vector<Eigen::VectorXd> hbar;
    std::vector<Eigen::VectorXd> ebar;
    Eigen::VectorXd x_tmp, dec_in_tmp, dpred_tmp, ddelta_tmp, din_tmp;

    void prepare(std::size_t steps, TrainMode mode) {
        enc.resize(steps);
        gru.resize(steps);
        dec.resize(steps - 1);
        h.resize(steps + 1);
        pred.resize(steps - 1);
        hbar.resize(steps + 1);
        ebar.resize(steps);
        if (mode == TrainMode::TimeInvariant) {
            gru_alt.resize(steps - 1);
            dec_alt.resize(steps - 1);
            pred_alt.resize(steps - 1);
        }
    }
};

struct SequenceLosses {
    double standard = 0.0;
    double shuffled = 0.0;

    double total(TrainMode mode) const {
        return mode == TrainMode::TimeInvariant ? standard + shuffled : standard;
    }
};

namespace detail {

inline double l1_mean(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return (a - b).cwiseAbs().mean();
}

}  // namespace detail

// Forward pass over one trajectory; caches everything needed for the
// backward pass. perm must be a bijection on {0..T} in time-invariant mode
// and is ignored otherwise. Losses are per-step means of the per-feature
// mean absolute error, matching the training objective.
inline SequenceLosses bptt_forward(const WorldModel& model, const env::Trajectory& traj,
                                   TrainMode mode, std::span<const std::size_t> perm,
                                   BpttWorkspace& ws) {
    const std::size_t steps = traj.length();
    if (steps < 2) throw std::invalid_argument("bptt: trajectory must have at least 2 steps");
    if (mode == TrainMode::TimeInvariant && perm.size() != steps + 1) {
        throw std::invalid_argument("bptt: permutation must cover {0..T}");
    }
    const std::size_t loss_terms = steps - 1;
    ws.prepare(steps, mode);

    ws.h[0] = model.zero_memory();
    for (std::size_t t = 0; t < steps; ++t) {
        model.normalized_input_into(traj.states[t], traj.actions[t], ws.x_tmp);
        const Eigen::VectorXd& e = model.encoder().forward(ws.x_tmp, ws.enc[t]);
        ws.h[t + 1] = model.gru().step(e, ws.h[t], ws.gru[t]);
    }

    SequenceLosses losses;
    const auto mem = static_cast<Eigen::Index>(model.memory_dim());
    const auto enc_dim = static_cast<Eigen::Index>(model.encoding_dim());
    ws.dec_in_tmp.resize(mem + enc_dim);
    for (std::size_t t = 0; t < loss_terms; ++t) {
        const Eigen::VectorXd& e = ws.enc[t].a.back();
        ws.dec_in_tmp.head(mem) = ws.h[t + 1];
        ws.dec_in_tmp.tail(enc_dim) = e;
        const Eigen::VectorXd& delta = model.decoder().forward(ws.dec_in_tmp, ws.dec[t]);
        ws.pred[t] = traj.states[t] +
                     delta.cwiseProduct(model.normalization().delta_scale);
        losses.standard += detail::l1_mean(ws.pred[t], traj.states[t + 1]);
    }
    losses.standard /= static_cast<double>(loss_terms);

    if (mode == TrainMode::TimeInvariant) {
        for (std::size_t t = 0; t < loss_terms; ++t) {
            const Eigen::VectorXd& e = ws.enc[t].a.back();
            const Eigen::VectorXd& h_used = ws.h[perm[t]];
            const Eigen::VectorXd& h_alt = model.gru().step(e, h_used, ws.gru_alt[t]);
            ws.dec_in_tmp.head(mem) = h_alt;
            ws.dec_in_tmp.tail(enc_dim) = e;
            const Eigen::VectorXd& delta = model.decoder().forward(ws.dec_in_tmp, ws.dec_alt[t]);
            ws.pred_alt[t] = traj.states[t] +
                             delta.cwiseProduct(model.normalization().delta_scale);
            losses.shuffled += detail::l1_mean(ws.pred_alt[t], traj.states[t + 1]);
        }
        losses.shuffled /= static_cast<double>(loss_terms);
    }
    return losses;
}

// Accumulates d(total loss)/d(params) into grad, scaled by loss_weight
// (1/batch for minibatch averaging). Gradients flow through every use of
// each memory value: the decoder reads, the recurrent chain, and in
// time-invariant mode the permuted one-off GRU evaluations.
inline void bptt_backward(const WorldModel& model, const env::Trajectory& traj, TrainMode mode,
                          std::span<const std::size_t> perm, BpttWorkspace& ws, ModelGrad& grad,
                          double loss_weight) {
    const std::size_t steps = traj.length();
    const std::size_t loss_terms = steps - 1;
    const auto mem = static_cast<Eigen::Index>(model.memory_dim());
    const auto enc_dim = static_cast<Eigen::Index>(model.encoding_dim());
    const auto sd = static_cast<Eigen::Index>(model.state_dim());

    for (std::size_t t = 0; t <= steps; ++t) {
        if (ws.hbar[t].size() != mem) ws.hbar[t] = Eigen::VectorXd::Zero(mem);
        else ws.hbar[t].setZero();
        if (t < steps) {
            if (ws.ebar[t].size() != enc_dim) ws.ebar[t] = Eigen::VectorXd::Zero(enc_dim);
            else ws.ebar[t].setZero();
        }
    }

    const double w = loss_weight / static_cast<double>(loss_terms);
    const auto& delta_scale = model.normalization().delta_scale;
    ws.ddelta_tmp.resize(sd);

    auto output_backward = [&](const Eigen::VectorXd& pred, const Eigen::VectorXd& target,
                               const nn::DenseNet::Cache& dec_cache) {
        for (Eigen::Index i = 0; i < sd; ++i) {
            const double g = nn::sign0(pred(i) - target(i)) * w / static_cast<double>(sd);
            ws.ddelta_tmp(i) = g * delta_scale(i);
        }
        return model.decoder().backward(dec_cache, ws.ddelta_tmp, grad.decoder);
    };

    // prediction paths
    for (std::size_t t = 0; t < loss_terms; ++t) {
        Eigen::VectorXd din = output_backward(ws.pred[t], traj.states[t + 1], ws.dec[t]);
        ws.hbar[t + 1] += din.head(mem);
        ws.ebar[t] += din.tail(enc_dim);
        if (mode == TrainMode::TimeInvariant) {
            Eigen::VectorXd din_alt =
                output_backward(ws.pred_alt[t], traj.states[t + 1], ws.dec_alt[t]);
            ws.ebar[t] += din_alt.tail(enc_dim);
            const Eigen::VectorXd dh_alt = din_alt.head(mem);
            model.gru().backward(ws.gru_alt[t], dh_alt, grad.gru, ws.ebar[t], ws.hbar[perm[t]]);
        }
    }

    // recurrent chain, newest step first so each hbar[t+1] is complete
    for (std::size_t t = steps; t-- > 0;) {
        model.gru().backward(ws.gru[t], ws.hbar[t + 1], grad.gru, ws.ebar[t], ws.hbar[t]);
    }

    // encoder
    for (std::size_t t = 0; t < steps; ++t) {
        model.encoder().backward(ws.enc[t], ws.ebar[t], grad.encoder);
    }
}

}  // namespace hplb::wm

#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>

#include "hplb/core/rng.hpp"

namespace hplb::nn {

inline Eigen::ArrayXd sigmoid(const Eigen::ArrayXd& x) {
    return 0.5 * (0.5 * x).tanh() + 0.5;
}

// Gated recurrent unit:
//   z  = sigmoid(Wz u + Uz h + bz)
//   r  = sigmoid(Wr u + Ur h + br)
//   c  = tanh(Wc u + Uc (r.h) + bc)
//   h' = (1-z).h + z.c
// so zero parameters give h' = 0.5 h. Gradients are hand-derived reverse
// mode; forward passes cache gate values in a caller-owned workspace.
class GruCell {
public:
    struct Cache {
        Eigen::VectorXd u, h;        // inputs
        Eigen::VectorXd z, r, c, rh; // gate values, rh = r.h
        Eigen::VectorXd h_next;
    };

    struct Grad {
        Eigen::MatrixXd wz, wr, wc;  // input-side, hidden x in
        Eigen::MatrixXd uz, ur, uc;  // recurrent, hidden x hidden
        Eigen::VectorXd bz, br, bc;
        bool shaped = false;
    };

    GruCell() = default;

    GruCell(std::size_t input_dim, std::size_t hidden_dim) {
        const auto in = static_cast<Eigen::Index>(input_dim);
        const auto hid = static_cast<Eigen::Index>(hidden_dim);
        if (in < 1 || hid < 1) throw std::invalid_argument("gru: dimensions must be positive");
        wz_ = Eigen::MatrixXd::Zero(hid, in);
        wr_ = Eigen::MatrixXd::Zero(hid, in);
        wc_ = Eigen::MatrixXd::Zero(hid, in);
        uz_ = Eigen::MatrixXd::Zero(hid, hid);
        ur_ = Eigen::MatrixXd::Zero(hid, hid);
        uc_ = Eigen::MatrixXd::Zero(hid, hid);
        bz_ = Eigen::VectorXd::Zero(hid);
        br_ = Eigen::VectorXd::Zero(hid);
        bc_ = Eigen::VectorXd::Zero(hid);
    }

    std::size_t input_dim() const { return static_cast<std::size_t>(wz_.cols()); }
    std::size_t hidden_dim() const { return static_cast<std::size_t>(wz_.rows()); }

    void init_uniform(Rng& rng) {
        const double wb = 1.0 / std::sqrt(static_cast<double>(input_dim()));
        const double ub = 1.0 / std::sqrt(static_cast<double>(hidden_dim()));
        for (auto* m : {&wz_, &wr_, &wc_}) {
            for (Eigen::Index j = 0; j < m->cols(); ++j)
                for (Eigen::Index i = 0; i < m->rows(); ++i) (*m)(i, j) = rng.uniform(-wb, wb);
        }
        for (auto* m : {&uz_, &ur_, &uc_}) {
            for (Eigen::Index j = 0; j < m->cols(); ++j)
                for (Eigen::Index i = 0; i < m->rows(); ++i) (*m)(i, j) = rng.uniform(-ub, ub);
        }
        for (auto* v : {&bz_, &br_, &bc_}) {
            for (Eigen::Index i = 0; i < v->size(); ++i) (*v)(i) = rng.uniform(-ub, ub);
        }
    }

    const Eigen::VectorXd& step(const Eigen::VectorXd& input, const Eigen::VectorXd& h,
                                Cache& cache) const {
        if (static_cast<std::size_t>(input.size()) != input_dim() ||
            static_cast<std::size_t>(h.size()) != hidden_dim()) {
            throw std::invalid_argument(
                "gru: got input/memory dimensions (" + std::to_string(input.size()) + ", " +
                std::to_string(h.size()) + "), expected (" + std::to_string(input_dim()) +
                ", " + std::to_string(hidden_dim()) + ")");
        }
        cache.u = input;
        cache.h = h;
        Eigen::VectorXd pre = bz_;
        pre.noalias() += wz_ * input;
        pre.noalias() += uz_ * h;
        cache.z = sigmoid(pre.array());
        pre = br_;
        pre.noalias() += wr_ * input;
        pre.noalias() += ur_ * h;
        cache.r = sigmoid(pre.array());
        cache.rh = cache.r.cwiseProduct(h);
        pre = bc_;
        pre.noalias() += wc_ * input;
        pre.noalias() += uc_ * cache.rh;
        cache.c = pre.array().tanh();
        cache.h_next = (1.0 - cache.z.array()) * h.array() + cache.z.array() * cache.c.array();
        return cache.h_next;
    }

    // Backpropagates d_h_next through one step; accumulates parameter
    // gradients and returns (d_input, d_h) via output arguments (accumulated).
    void backward(const Cache& cache, const Eigen::VectorXd& d_h_next, Grad& grad,
                  Eigen::VectorXd& d_input_acc, Eigen::VectorXd& d_h_acc) const {
        ensure_grad_shape(grad);
        const auto& z = cache.z.array();
        const auto& c = cache.c.array();
        const auto& h = cache.h.array();

        Eigen::VectorXd dz = (d_h_next.array() * (c - h)).matrix();
        Eigen::VectorXd dc = (d_h_next.array() * z).matrix();
        d_h_acc.array() += d_h_next.array() * (1.0 - z);

        // candidate pre-activation
        Eigen::VectorXd dac = (dc.array() * (1.0 - c.square())).matrix();
        grad.wc.noalias() += dac * cache.u.transpose();
        grad.uc.noalias() += dac * cache.rh.transpose();
        grad.bc += dac;
        Eigen::VectorXd drh = uc_.transpose() * dac;
        Eigen::VectorXd dr = drh.cwiseProduct(cache.h);
        d_h_acc += drh.cwiseProduct(cache.r);

        // gate pre-activations (sigmoid' = s(1-s))
        Eigen::VectorXd daz = (dz.array() * z * (1.0 - z)).matrix();
        Eigen::VectorXd dar =
            (dr.array() * cache.r.array() * (1.0 - cache.r.array())).matrix();
        grad.wz.noalias() += daz * cache.u.transpose();
        grad.uz.noalias() += daz * cache.h.transpose();
        grad.bz += daz;
        grad.wr.noalias() += dar * cache.u.transpose();
        grad.ur.noalias() += dar * cache.h.transpose();
        grad.br += dar;

        d_h_acc.noalias() += uz_.transpose() * daz;
        d_h_acc.noalias() += ur_.transpose() * dar;
        d_input_acc.noalias() += wz_.transpose() * daz;
        d_input_acc.noalias() += wr_.transpose() * dar;
        d_input_acc.noalias() += wc_.transpose() * dac;
    }

    void ensure_grad_shape(Grad& grad) const {
        if (grad.shaped) return;
        const auto in = static_cast<Eigen::Index>(input_dim());
        const auto hid = static_cast<Eigen::Index>(hidden_dim());
        grad.wz = Eigen::MatrixXd::Zero(hid, in);
        grad.wr = Eigen::MatrixXd::Zero(hid, in);
        grad.wc = Eigen::MatrixXd::Zero(hid, in);
        grad.uz = Eigen::MatrixXd::Zero(hid, hid);
        grad.ur = Eigen::MatrixXd::Zero(hid, hid);
        grad.uc = Eigen::MatrixXd::Zero(hid, hid);
        grad.bz = Eigen::VectorXd::Zero(hid);
        grad.br = Eigen::VectorXd::Zero(hid);
        grad.bc = Eigen::VectorXd::Zero(hid);
        grad.shaped = true;
    }

    std::size_t param_count() const {
        return static_cast<std::size_t>(3 * (wz_.size() + uz_.size() + bz_.size()));
    }

    // Flat order: Wz Wr Wc Uz Ur Uc bz br bc, matrices column-major.
    void copy_params_to(std::span<double> out) const {
        std::size_t k = 0;
        for (const auto* m : {&wz_, &wr_, &wc_, &uz_, &ur_, &uc_}) {
            std::copy(m->data(), m->data() + m->size(), out.data() + k);
            k += static_cast<std::size_t>(m->size());
        }
        for (const auto* v : {&bz_, &br_, &bc_}) {
            std::copy(v->data(), v->data() + v->size(), out.data() + k);
            k += static_cast<std::size_t>(v->size());
        }
    }

    void copy_params_from(std::span<const double> in) {
        std::size_t k = 0;
        for (auto* m : {&wz_, &wr_, &wc_, &uz_, &ur_, &uc_}) {
            std::copy(in.data() + k, in.data() + k + m->size(), m->data());
            k += static_cast<std::size_t>(m->size());
        }
        for (auto* v : {&bz_, &br_, &bc_}) {
            std::copy(in.data() + k, in.data() + k + v->size(), v->data());
            k += static_cast<std::size_t>(v->size());
        }
    }

    static void copy_grad_to(const Grad& grad, std::span<double> out) {
        std::size_t k = 0;
        for (const auto* m : {&grad.wz, &grad.wr, &grad.wc, &grad.uz, &grad.ur, &grad.uc}) {
            std::copy(m->data(), m->data() + m->size(), out.data() + k);
            k += static_cast<std::size_t>(m->size());
        }
        for (const auto* v : {&grad.bz, &grad.br, &grad.bc}) {
            std::copy(v->data(), v->data() + v->size(), out.data() + k);
            k += static_cast<std::size_t>(v->size());
        }
    }

private:
    Eigen::MatrixXd wz_, wr_, wc_;
    Eigen::MatrixXd uz_, ur_, uc_;
    Eigen::VectorXd bz_, br_, bc_;
};

}  // namespace hplb::nn

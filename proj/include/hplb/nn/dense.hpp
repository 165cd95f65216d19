#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hplb/core/rng.hpp"

namespace hplb::nn {

enum class Activation { Tanh, Identity };

// Fully-connected feed-forward net with per-layer tanh/identity activations
// and hand-written reverse-mode gradients. Forward passes cache activations
// into a caller-owned workspace so the net itself stays immutable and
// shareable across threads.
class DenseNet {
public:
    struct Layer {
        Eigen::MatrixXd w;  // out x in
        Eigen::VectorXd b;
        Activation act = Activation::Tanh;
    };

    // Caller-owned forward cache: activations per layer, a[0] is the input.
    struct Cache {
        std::vector<Eigen::VectorXd> a;
    };

    struct Grad {
        std::vector<Eigen::MatrixXd> w;
        std::vector<Eigen::VectorXd> b;
    };

    DenseNet() = default;

    // dims = {in, hidden..., out}; acts has dims.size()-1 entries.
    DenseNet(const std::vector<std::size_t>& dims, const std::vector<Activation>& acts) {
        if (dims.size() < 2) throw std::invalid_argument("dense: need at least one layer");
        if (acts.size() != dims.size() - 1) {
            throw std::invalid_argument("dense: one activation per layer required");
        }
        layers_.resize(dims.size() - 1);
        for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
            layers_[l].w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dims[l + 1]),
                                                 static_cast<Eigen::Index>(dims[l]));
            layers_[l].b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dims[l + 1]));
            layers_[l].act = acts[l];
        }
    }

    // Standard tanh net: hidden layers tanh, output layer identity.
    static DenseNet mlp(std::size_t in, const std::vector<std::size_t>& hidden,
                        std::size_t out) {
        std::vector<std::size_t> dims;
        dims.push_back(in);
        dims.insert(dims.end(), hidden.begin(), hidden.end());
        dims.push_back(out);
        std::vector<Activation> acts(dims.size() - 1, Activation::Tanh);
        acts.back() = Activation::Identity;
        return DenseNet(dims, acts);
    }

    void init_uniform(Rng& rng) {
        for (auto& layer : layers_) {
            const double bound = 1.0 / std::sqrt(static_cast<double>(layer.w.cols()));
            for (Eigen::Index j = 0; j < layer.w.cols(); ++j)
                for (Eigen::Index i = 0; i < layer.w.rows(); ++i)
                    layer.w(i, j) = rng.uniform(-bound, bound);
            for (Eigen::Index i = 0; i < layer.b.size(); ++i)
                layer.b(i) = rng.uniform(-bound, bound);
        }
    }

    std::size_t input_dim() const { return static_cast<std::size_t>(layers_.front().w.cols()); }
    std::size_t output_dim() const { return static_cast<std::size_t>(layers_.back().w.rows()); }
    const std::vector<Layer>& layers() const { return layers_; }
    std::vector<Layer>& layers() { return layers_; }

    std::vector<std::size_t> dims() const {
        std::vector<std::size_t> d;
        d.push_back(input_dim());
        for (const auto& layer : layers_) d.push_back(static_cast<std::size_t>(layer.w.rows()));
        return d;
    }

    const Eigen::VectorXd& forward(const Eigen::VectorXd& input, Cache& cache) const {
        if (static_cast<std::size_t>(input.size()) != input_dim()) {
            throw std::invalid_argument("dense: input has dimension " +
                                        std::to_string(input.size()) + ", expected " +
                                        std::to_string(input_dim()));
        }
        cache.a.resize(layers_.size() + 1);
        cache.a[0] = input;
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            auto& out = cache.a[l + 1];
            out.noalias() = layers_[l].w * cache.a[l];
            out += layers_[l].b;
            if (layers_[l].act == Activation::Tanh) out = out.array().tanh();
        }
        return cache.a.back();
    }

    // Accumulates parameter gradients into grad and returns the gradient with
    // respect to the input. d_out is the loss gradient at the net output.
    Eigen::VectorXd backward(const Cache& cache, const Eigen::VectorXd& d_out,
                             Grad& grad) const {
        ensure_grad_shape(grad);
        Eigen::VectorXd delta = d_out;
        for (std::size_t l = layers_.size(); l-- > 0;) {
            if (layers_[l].act == Activation::Tanh) {
                delta.array() *= 1.0 - cache.a[l + 1].array().square();
            }
            grad.w[l].noalias() += delta * cache.a[l].transpose();
            grad.b[l] += delta;
            if (l > 0) {
                delta = layers_[l].w.transpose() * delta;
            } else {
                return layers_[l].w.transpose() * delta;
            }
        }
        return delta;  // unreachable for non-empty nets
    }

    void ensure_grad_shape(Grad& grad) const {
        if (grad.w.size() == layers_.size()) return;
        grad.w.resize(layers_.size());
        grad.b.resize(layers_.size());
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            grad.w[l] = Eigen::MatrixXd::Zero(layers_[l].w.rows(), layers_[l].w.cols());
            grad.b[l] = Eigen::VectorXd::Zero(layers_[l].b.size());
        }
    }

    std::size_t param_count() const {
        std::size_t n = 0;
        for (const auto& layer : layers_) {
            n += static_cast<std::size_t>(layer.w.size() + layer.b.size());
        }
        return n;
    }

    // Flat parameter order: per layer, column-major weights then bias.
    void copy_params_to(std::span<double> out) const {
        std::size_t k = 0;
        for (const auto& layer : layers_) {
            std::copy(layer.w.data(), layer.w.data() + layer.w.size(), out.data() + k);
            k += static_cast<std::size_t>(layer.w.size());
            std::copy(layer.b.data(), layer.b.data() + layer.b.size(), out.data() + k);
            k += static_cast<std::size_t>(layer.b.size());
        }
    }

    void copy_params_from(std::span<const double> in) {
        std::size_t k = 0;
        for (auto& layer : layers_) {
            std::copy(in.data() + k, in.data() + k + layer.w.size(), layer.w.data());
            k += static_cast<std::size_t>(layer.w.size());
            std::copy(in.data() + k, in.data() + k + layer.b.size(), layer.b.data());
            k += static_cast<std::size_t>(layer.b.size());
        }
    }

    static void copy_grad_to(const Grad& grad, std::span<double> out) {
        std::size_t k = 0;
        for (std::size_t l = 0; l < grad.w.size(); ++l) {
            std::copy(grad.w[l].data(), grad.w[l].data() + grad.w[l].size(), out.data() + k);
            k += static_cast<std::size_t>(grad.w[l].size());
            std::copy(grad.b[l].data(), grad.b[l].data() + grad.b[l].size(), out.data() + k);
            k += static_cast<std::size_t>(grad.b[l].size());
        }
    }

private:
    std::vector<Layer> layers_;
};

}  // namespace hplb::nn

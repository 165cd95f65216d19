#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace hplb::nn {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Flat trainable parameter vector with matching gradient buffer and Adam
// moment state. Models pack into / unpack from this in a stable index order,
// which is also the order used by the checkpoint format.
struct ParamVector {
    Eigen::VectorXd values;
    Eigen::VectorXd grad;
    Eigen::VectorXd m;
    Eigen::VectorXd v;
    std::int64_t step = 0;

    explicit ParamVector(Eigen::Index n = 0)
        : values(Eigen::VectorXd::Zero(n)),
          grad(Eigen::VectorXd::Zero(n)),
          m(Eigen::VectorXd::Zero(n)),
          v(Eigen::VectorXd::Zero(n)) {}

    Eigen::Index size() const { return values.size(); }
    void zero_grad() { grad.setZero(); }
};

// One Adam update from params.grad. The step counter is incremented before
// bias correction. Throws on non-finite gradients so a diverged training run
// stops at the first bad batch instead of writing NaN checkpoints.
inline void adam_step(ParamVector& params, const AdamConfig& cfg) {
    if (!params.grad.allFinite()) {
        throw std::runtime_error("adam_step: non-finite gradient at step " +
                                 std::to_string(params.step + 1));
    }
    params.step += 1;
    const double b1 = cfg.beta1;
    const double b2 = cfg.beta2;
    const double corr1 = 1.0 - std::pow(b1, static_cast<double>(params.step));
    const double corr2 = 1.0 - std::pow(b2, static_cast<double>(params.step));
    for (Eigen::Index i = 0; i < params.size(); ++i) {
        const double g = params.grad(i);
        params.m(i) = b1 * params.m(i) + (1.0 - b1) * g;
        params.v(i) = b2 * params.v(i) + (1.0 - b2) * g * g;
        const double m_hat = params.m(i) / corr1;
        const double v_hat = params.v(i) / corr2;
        params.values(i) -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
}

}  // namespace hplb::nn

#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace hplb::nn {

inline double sign0(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

struct L1Result {
    double loss = 0.0;
    Eigen::VectorXd grad;  // d loss / d prediction
};

// Mean absolute difference, with subgradient sign(prediction - target)/n and
// sign(0) = 0 so exact ties contribute nothing.
inline L1Result l1_loss(const Eigen::VectorXd& prediction, const Eigen::VectorXd& target) {
    if (prediction.size() != target.size()) {
        throw std::invalid_argument("l1_loss: prediction has length " +
                                    std::to_string(prediction.size()) + ", target " +
                                    std::to_string(target.size()));
    }
    const double n = static_cast<double>(prediction.size());
    L1Result res;
    res.grad.resize(prediction.size());
    double sum = 0.0;
    for (Eigen::Index i = 0; i < prediction.size(); ++i) {
        const double d = prediction(i) - target(i);
        sum += std::abs(d);
        res.grad(i) = sign0(d) / n;
    }
    res.loss = sum / n;
    return res;
}

}  // namespace hplb::nn

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <map>
#include <stdexcept>
#include <vector>

namespace hplb::analysis {

enum class Task { Discrete, Continuous };

// k-nearest-neighbor estimation with L1 feature distance.
//
// Discrete: majority vote. Neighbors are every training point whose distance
// does not exceed the k-th smallest, so exact distance ties are not broken
// arbitrarily (with all-identical features this degenerates to a vote over
// the whole training set). Vote ties go to the closest neighbor whose label
// is among the tied classes.
//
// Continuous: mean label of the k nearest, ties resolved by training index.
inline std::vector<double> knn_estimate(const Eigen::MatrixXd& train_x,
                                        const Eigen::VectorXd& train_y,
                                        const Eigen::MatrixXd& test_x, std::size_t k,
                                        Task task) {
    const std::size_t n = static_cast<std::size_t>(train_x.rows());
    if (n == 0) throw std::invalid_argument("knn: empty training set");
    if (k < 1 || k > n) throw std::invalid_argument("knn: k must be in [1, |train|]");
    if (train_x.cols() != test_x.cols()) {
        throw std::invalid_argument("knn: train/test feature dimensions differ");
    }
    if (train_y.size() != train_x.rows()) {
        throw std::invalid_argument("knn: label count does not match training set");
    }

    std::vector<double> out(static_cast<std::size_t>(test_x.rows()));
    std::vector<std::pair<double, std::size_t>> order(n);
    for (Eigen::Index q = 0; q < test_x.rows(); ++q) {
        for (std::size_t i = 0; i < n; ++i) {
            order[i] = {(train_x.row(static_cast<Eigen::Index>(i)) - test_x.row(q))
                            .cwiseAbs()
                            .sum(),
                        i};
        }
        std::sort(order.begin(), order.end());

        if (task == Task::Continuous) {
            double sum = 0.0;
            for (std::size_t i = 0; i < k; ++i) sum += train_y(static_cast<Eigen::Index>(order[i].second));
            out[static_cast<std::size_t>(q)] = sum / static_cast<double>(k);
            continue;
        }

        const double kth = order[k - 1].first;
        std::map<double, std::size_t> votes;
        std::size_t neighbors = 0;
        for (; neighbors < n && order[neighbors].first <= kth; ++neighbors) {
            votes[train_y(static_cast<Eigen::Index>(order[neighbors].second))] += 1;
        }
        std::size_t best = 0;
        for (const auto& [label, count] : votes) best = std::max(best, count);
        // closest neighbor carrying a top-voted label wins
        double pick = 0.0;
        for (std::size_t i = 0; i < neighbors; ++i) {
            const double label = train_y(static_cast<Eigen::Index>(order[i].second));
            if (votes[label] == best) {
                pick = label;
                break;
            }
        }
        out[static_cast<std::size_t>(q)] = pick;
    }
    return out;
}

}  // namespace hplb::analysis

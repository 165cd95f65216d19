#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "hplb/analysis/feature_set.hpp"
#include "hplb/analysis/knn.hpp"
#include "hplb/core/csv.hpp"
#include "hplb/env/hidden_param.hpp"

namespace hplb::analysis {

// Estimation quality as a function of how much of the trajectory the memory
// has seen: classification accuracy for discrete parameters, mean absolute
// error on min-max-normalized values for continuous ones.
struct EstimationCurve {
    std::vector<std::size_t> steps;
    std::vector<double> values;
    FeatureKind kind = FeatureKind::BaselineMemory;
    Task task = Task::Discrete;
    std::size_t train_size = 0;
    std::size_t test_size = 0;
};

inline EstimationCurve estimation_curve(const FeatureSet& train, const FeatureSet& test,
                                        std::size_t k, Task task,
                                        const env::HiddenParamSpec& spec) {
    if (train.trajectories() == 0 || test.trajectories() == 0) {
        throw std::invalid_argument("estimation: empty feature sets");
    }
    if (train.dim() != test.dim()) {
        throw std::invalid_argument("estimation: train/test feature dimensions differ");
    }
    if (train.horizon() != test.horizon()) {
        throw std::invalid_argument("estimation: train/test horizons differ");
    }
    EstimationCurve curve;
    curve.kind = train.kind;
    curve.task = task;
    curve.train_size = train.trajectories();
    curve.test_size = test.trajectories();
    for (std::size_t t = 0; t <= train.horizon(); ++t) {
        const auto preds = knn_estimate(train.at_time(t), train.labels, test.at_time(t), k, task);
        double metric = 0.0;
        for (std::size_t i = 0; i < preds.size(); ++i) {
            const double truth = test.labels(static_cast<Eigen::Index>(i));
            if (task == Task::Discrete) {
                metric += preds[i] == truth ? 1.0 : 0.0;
            } else {
                metric += std::abs(spec.normalize(preds[i]) - spec.normalize(truth));
            }
        }
        curve.steps.push_back(t);
        curve.values.push_back(metric / static_cast<double>(preds.size()));
    }
    return curve;
}

inline void save_curve_csv(const EstimationCurve& curve, const std::string& path) {
    CsvWriter csv(path, {"step", "value", "kind", "task", "train_size", "test_size"});
    for (std::size_t i = 0; i < curve.steps.size(); ++i) {
        csv.write_row({CsvWriter::num(curve.steps[i]), CsvWriter::num(curve.values[i]),
                       feature_kind_name(curve.kind),
                       curve.task == Task::Discrete ? "accuracy" : "mae",
                       CsvWriter::num(curve.train_size), CsvWriter::num(curve.test_size)});
    }
}

}  // namespace hplb::analysis

#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hplb/bisim/embedding.hpp"
#include "hplb/core/thread_pool.hpp"
#include "hplb/env/trajectory.hpp"
#include "hplb/wm/encode.hpp"

namespace hplb::analysis {

enum class FeatureKind { BaselineMemory, TimeInvariantMemory, Embedded };

inline const char* feature_kind_name(FeatureKind k) {
    switch (k) {
        case FeatureKind::BaselineMemory: return "baseline-memory";
        case FeatureKind::TimeInvariantMemory: return "time-invariant-memory";
        case FeatureKind::Embedded: return "embedded";
    }
    return "?";
}

// Per-trajectory, per-time feature vectors with the evaluation-only hidden
// labels. Feature producers never read the labels; they ride along for the
// estimation metrics.
struct FeatureSet {
    FeatureKind kind = FeatureKind::BaselineMemory;
    std::vector<Eigen::MatrixXd> features;  // per trajectory: (T+1) rows x dim
    Eigen::VectorXd labels;

    std::size_t trajectories() const { return features.size(); }
    std::size_t horizon() const {
        return features.empty() ? 0 : static_cast<std::size_t>(features[0].rows()) - 1;
    }
    std::size_t dim() const {
        return features.empty() ? 0 : static_cast<std::size_t>(features[0].cols());
    }

    // n x dim matrix of every trajectory's feature at time t
    Eigen::MatrixXd at_time(std::size_t t) const {
        Eigen::MatrixXd out(static_cast<Eigen::Index>(features.size()),
                            static_cast<Eigen::Index>(dim()));
        for (std::size_t i = 0; i < features.size(); ++i) {
            if (t >= static_cast<std::size_t>(features[i].rows())) {
                throw std::invalid_argument("feature set: time index out of range");
            }
            out.row(static_cast<Eigen::Index>(i)) = features[i].row(static_cast<Eigen::Index>(t));
        }
        return out;
    }
};

// Runs the model over each trajectory and stores h_t for every t, optionally
// mapped through the metric embedding.
inline FeatureSet build_feature_set(const wm::WorldModel& model,
                                    const std::vector<env::Trajectory>& dataset,
                                    FeatureKind kind,
                                    const bisim::EmbeddingModel* embedding,
                                    ThreadPool& pool) {
    if (kind == FeatureKind::Embedded && embedding == nullptr) {
        throw std::invalid_argument("feature set: embedded kind requires an embedding model");
    }
    FeatureSet out;
    out.kind = kind;
    out.features.resize(dataset.size());
    out.labels.resize(static_cast<Eigen::Index>(dataset.size()));
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        out.labels(static_cast<Eigen::Index>(i)) = dataset[i].hidden;
    }
    pool.parallel_for(dataset.size(), [&](std::size_t i) {
        const auto memories = wm::encode_trajectory_all(model, dataset[i]);
        const std::size_t dim = kind == FeatureKind::Embedded
                                    ? embedding->output_dim()
                                    : static_cast<std::size_t>(memories[0].size());
        Eigen::MatrixXd rows(static_cast<Eigen::Index>(memories.size()),
                             static_cast<Eigen::Index>(dim));
        for (std::size_t t = 0; t < memories.size(); ++t) {
            if (kind == FeatureKind::Embedded) {
                rows.row(static_cast<Eigen::Index>(t)) = bisim::embed(*embedding, memories[t]);
            } else {
                rows.row(static_cast<Eigen::Index>(t)) = memories[t];
            }
        }
        out.features[i] = std::move(rows);
    });
    return out;
}

}  // namespace hplb::analysis

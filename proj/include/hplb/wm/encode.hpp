#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

#include "hplb/env/trajectory.hpp"
#include "hplb/wm/world_model.hpp"

namespace hplb::wm {

// Memories h_0..h_upto obtained by running the model over the trajectory
// prefix from the zero memory. Only the encoder and GRU run; no predictions
// are made.
inline std::vector<Eigen::VectorXd> encode_trajectory_prefix(const WorldModel& model,
                                                             const env::Trajectory& traj,
                                                             std::size_t upto) {
    if (upto > traj.length()) {
        throw std::invalid_argument("encode: step " + std::to_string(upto) +
                                    " beyond trajectory length " +
                                    std::to_string(traj.length()));
    }
    std::vector<Eigen::VectorXd> h;
    h.reserve(upto + 1);
    h.push_back(model.zero_memory());
    nn::DenseNet::Cache enc_cache;
    nn::GruCell::Cache gru_cache;
    Eigen::VectorXd x;
    for (std::size_t t = 0; t < upto; ++t) {
        model.normalized_input_into(traj.states[t], traj.actions[t], x);
        const Eigen::VectorXd& e = model.encoder().forward(x, enc_cache);
        h.push_back(model.gru().step(e, h.back(), gru_cache));
    }
    return h;
}

inline Eigen::VectorXd encode_trajectory(const WorldModel& model, const env::Trajectory& traj,
                                         std::size_t upto) {
    return encode_trajectory_prefix(model, traj, upto).back();
}

inline std::vector<Eigen::VectorXd> encode_trajectory_all(const WorldModel& model,
                                                          const env::Trajectory& traj) {
    return encode_trajectory_prefix(model, traj, traj.length());
}

}  // namespace hplb::wm

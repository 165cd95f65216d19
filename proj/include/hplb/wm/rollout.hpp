#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

#include "hplb/env/trajectory.hpp"
#include "hplb/wm/world_model.hpp"

namespace hplb::wm {

struct RolloutResult {
    std::vector<Eigen::VectorXd> states;  // starts with the given start state
    bool diverged = false;
};

constexpr double kRolloutDivergenceLimit = 1e6;

// Open-loop imagination: memory is populated by teacher-forcing the model on
// the first `condition_steps` transitions of the conditioning trajectory,
// then the model rolls out from `start`, feeding its own predictions back as
// states while continuing to update memory. Truncates and flags on numeric
// blow-up.
inline RolloutResult imagine_rollout(const WorldModel& model, const Eigen::VectorXd& start,
                                     const std::vector<Eigen::VectorXd>& actions,
                                     const env::Trajectory& conditioning,
                                     std::size_t condition_steps) {
    if (condition_steps > conditioning.length()) {
        throw std::invalid_argument("rollout: conditioning prefix longer than trajectory");
    }
    nn::DenseNet::Cache enc_cache;
    nn::GruCell::Cache gru_cache;
    Eigen::VectorXd x;
    Eigen::VectorXd h = model.zero_memory();
    for (std::size_t t = 0; t < condition_steps; ++t) {
        model.normalized_input_into(conditioning.states[t], conditioning.actions[t], x);
        const Eigen::VectorXd& e = model.encoder().forward(x, enc_cache);
        h = model.gru().step(e, h, gru_cache);
    }

    RolloutResult res;
    res.states.reserve(actions.size() + 1);
    res.states.push_back(start);
    Eigen::VectorXd s = start;
    for (const auto& a : actions) {
        auto step = model.forward(s, a, h);
        if (step.prediction.cwiseAbs().maxCoeff() > kRolloutDivergenceLimit) {
            res.diverged = true;
            break;
        }
        res.states.push_back(step.prediction);
        s = step.prediction;
        h = step.memory;
    }
    return res;
}

}  // namespace hplb::wm

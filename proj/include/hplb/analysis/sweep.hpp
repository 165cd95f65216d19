#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "hplb/core/csv.hpp"
#include "hplb/env/dataset.hpp"
#include "hplb/env/environment.hpp"
#include "hplb/wm/rollout.hpp"

namespace hplb::analysis {

struct SweepResult {
    std::vector<double> hidden_values;
    std::vector<wm::RolloutResult> rollouts;  // aligned with hidden_values
};

// Imagined rollouts from one action sequence, conditioned on simulator
// trajectories generated at each requested hidden value. The conditioning
// trajectories share a seed, so they differ only through the hidden
// parameter. With an empty start state each rollout continues from its own
// conditioning prefix's final state, keeping memory and state consistent;
// a non-empty start is used for all values instead.
inline SweepResult imagine_sweep(const wm::WorldModel& model, const env::Environment& e,
                                 const Eigen::VectorXd& start,
                                 const std::vector<Eigen::VectorXd>& actions,
                                 const std::vector<double>& hidden_values,
                                 std::size_t condition_steps, std::uint64_t seed) {
    SweepResult res;
    res.hidden_values = hidden_values;
    for (const double hidden : hidden_values) {
        const auto cond =
            env::generate_trajectory_with_hidden(e, condition_steps, seed, hidden);
        const Eigen::VectorXd& from = start.size() > 0 ? start : cond.states[condition_steps];
        res.rollouts.push_back(
            wm::imagine_rollout(model, from, actions, cond, condition_steps));
    }
    return res;
}

// Probe action sequence: drawn from the environment's own random policy so
// open-loop rollouts stay inside the state distribution the model was
// trained on. The same sequence is replayed for every hidden value.
inline std::vector<Eigen::VectorXd> default_sweep_actions(const env::Environment& e,
                                                          std::size_t steps,
                                                          std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Eigen::VectorXd> actions;
    actions.reserve(steps);
    for (std::size_t i = 0; i < steps; ++i) actions.push_back(e.sample_action(rng));
    return actions;
}

// Long-format CSV: one row per (hidden value, step), columns per feature.
inline void save_sweep_csv(const SweepResult& sweep,
                           const std::vector<std::string>& feature_names,
                           const std::string& path) {
    std::vector<std::string> header = {"hidden", "step", "diverged"};
    header.insert(header.end(), feature_names.begin(), feature_names.end());
    CsvWriter csv(path, header);
    for (std::size_t v = 0; v < sweep.hidden_values.size(); ++v) {
        const auto& rollout = sweep.rollouts[v];
        for (std::size_t t = 0; t < rollout.states.size(); ++t) {
            std::vector<std::string> row = {CsvWriter::num(sweep.hidden_values[v]),
                                            CsvWriter::num(t),
                                            rollout.diverged ? "1" : "0"};
            for (Eigen::Index f = 0; f < rollout.states[t].size(); ++f) {
                row.push_back(CsvWriter::num(rollout.states[t](f)));
            }
            csv.write_row(row);
        }
    }
}

}  // namespace hplb::analysis

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "hplb/core/rng.hpp"
#include "hplb/env/environment.hpp"
#include "hplb/env/trajectory.hpp"

namespace hplb::env {

// Rolls out one trajectory under the uniform random policy. Everything is a
// function of the given seed, so trajectory i of a dataset can be regenerated
// in isolation.
inline Trajectory generate_trajectory(const Environment& env, std::size_t length,
                                      std::uint64_t seed) {
    if (length < 2) throw std::invalid_argument("dataset: trajectory length must be >= 2");
    Rng rng(seed);
    Trajectory t;
    t.env = env.id();
    t.seed = seed;
    t.hidden = env.hidden_spec().sample(rng);
    t.states.reserve(length + 1);
    t.actions.reserve(length);
    t.states.push_back(env.initial_state(rng));
    for (std::size_t i = 0; i < length; ++i) {
        t.actions.push_back(env.sample_action(rng));
        t.states.push_back(env.step(t.states.back(), t.actions.back(), t.hidden));
    }
    return t;
}

// Same rollout but with the hidden value pinned, used for conditioning
// imagined rollouts on chosen parameter values. The same seed gives the same
// start state and action sequence across hidden values.
inline Trajectory generate_trajectory_with_hidden(const Environment& env, std::size_t length,
                                                  std::uint64_t seed, double hidden) {
    if (!env.hidden_spec().contains(hidden)) {
        throw std::invalid_argument("dataset: hidden value outside the declared range");
    }
    Rng rng(seed);
    Trajectory t;
    t.env = env.id();
    t.seed = seed;
    env.hidden_spec().sample(rng);  // keep the stream layout of generate_trajectory
    t.hidden = hidden;
    t.states.push_back(env.initial_state(rng));
    for (std::size_t i = 0; i < length; ++i) {
        t.actions.push_back(env.sample_action(rng));
        t.states.push_back(env.step(t.states.back(), t.actions.back(), t.hidden));
    }
    return t;
}

inline std::vector<Trajectory> generate_dataset(const Environment& env, std::size_t count,
                                                std::size_t length, std::uint64_t seed) {
    if (count == 0) throw std::invalid_argument("dataset: trajectory count must be positive");
    std::vector<Trajectory> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(generate_trajectory(env, length, derive_seed(seed, i)));
    }
    return out;
}

inline std::vector<Trajectory> generate_dataset(const std::string& env_id, std::size_t count,
                                                std::size_t length, std::uint64_t seed) {
    auto env = make_environment(env_id);
    return generate_dataset(*env, count, length, seed);
}

}  // namespace hplb::env

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hplb/core/numfmt.hpp"

namespace hplb::env {

// One rollout: states s_0..s_T, actions a_0..a_{T-1}, and the ground-truth
// hidden value. The hidden value is a label for evaluation only; nothing on
// the training path reads it.
struct Trajectory {
    std::vector<Eigen::VectorXd> states;
    std::vector<Eigen::VectorXd> actions;
    double hidden = 0.0;
    std::string env;
    std::uint64_t seed = 0;

    std::size_t length() const { return actions.size(); }

    void validate() const {
        if (states.size() != actions.size() + 1) {
            throw std::invalid_argument("trajectory: " + std::to_string(states.size()) +
                                        " states vs " + std::to_string(actions.size()) +
                                        " actions");
        }
        for (const auto& s : states) {
            if (!s.allFinite()) throw std::invalid_argument("trajectory: non-finite state");
        }
        for (const auto& a : actions) {
            if (!a.allFinite()) throw std::invalid_argument("trajectory: non-finite action");
        }
    }
};

namespace detail {

inline void append_vector_array(std::string& out, const std::vector<Eigen::VectorXd>& vs) {
    out += '[';
    for (std::size_t i = 0; i < vs.size(); ++i) {
        if (i) out += ',';
        out += '[';
        for (Eigen::Index k = 0; k < vs[i].size(); ++k) {
            if (k) out += ',';
            append_g17(out, vs[i](k));
        }
        out += ']';
    }
    out += ']';
}

inline std::vector<Eigen::VectorXd> parse_vector_array(const nlohmann::json& j) {
    std::vector<Eigen::VectorXd> out;
    out.reserve(j.size());
    for (const auto& row : j) {
        Eigen::VectorXd v(row.size());
        Eigen::Index k = 0;
        for (const auto& x : row) v(k++) = x.get<double>();
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace detail

// Line-delimited JSON, one trajectory per line, numbers with 17 significant
// digits. Hand-rolled writer keeps output byte-stable and fast on MB-scale
// datasets.
inline std::string trajectory_to_jsonl(const Trajectory& t) {
    std::string out;
    out.reserve(64 + 24 * (t.states.size() * static_cast<std::size_t>(
                                                 t.states.empty() ? 0 : t.states[0].size()) +
                           t.actions.size() * static_cast<std::size_t>(
                                                  t.actions.empty() ? 0 : t.actions[0].size())));
    out += "{\"actions\":";
    detail::append_vector_array(out, t.actions);
    out += ",\"env\":\"";
    out += t.env;
    out += "\",\"hidden\":";
    append_g17(out, t.hidden);
    out += ",\"seed\":";
    out += std::to_string(t.seed);
    out += ",\"states\":";
    detail::append_vector_array(out, t.states);
    out += '}';
    return out;
}

inline Trajectory trajectory_from_json(const nlohmann::json& j) {
    Trajectory t;
    t.env = j.at("env").get<std::string>();
    t.seed = j.at("seed").get<std::uint64_t>();
    t.hidden = j.at("hidden").get<double>();
    t.states = detail::parse_vector_array(j.at("states"));
    t.actions = detail::parse_vector_array(j.at("actions"));
    t.validate();
    return t;
}

inline void save_dataset(const std::vector<Trajectory>& dataset, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("dataset: cannot open " + path + " for writing");
    for (const auto& t : dataset) {
        out << trajectory_to_jsonl(t) << '\n';
    }
    if (!out) throw std::runtime_error("dataset: write to " + path + " failed");
}

inline std::vector<Trajectory> load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("dataset: cannot open " + path);
    std::vector<Trajectory> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            out.push_back(trajectory_from_json(nlohmann::json::parse(line)));
        } catch (const std::exception& e) {
            throw std::runtime_error("dataset: " + path + ":" + std::to_string(line_no) +
                                     ": " + e.what());
        }
    }
    return out;
}

}  // namespace hplb::env

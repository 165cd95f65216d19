#pragma once

#include <Eigen/Dense>

#include <nlohmann/json.hpp>

#include <cstdint>
#include <stdexcept>
#include <unordered_set>
#include <utility>
#include <vector>

#include "hplb/core/json_io.hpp"
#include "hplb/core/rng.hpp"
#include "hplb/env/trajectory.hpp"

namespace hplb::bisim {

// Representative state-action pairs over which memory distances are
// averaged. Fixed once per experiment and serialized alongside the distance
// matrix so the construction is reproducible.
struct AnchorSet {
    std::vector<Eigen::VectorXd> states;
    std::vector<Eigen::VectorXd> actions;
    std::vector<std::pair<std::size_t, std::size_t>> provenance;  // (trajectory, time)

    std::size_t size() const { return states.size(); }
};

// Uniform sample of `count` distinct (trajectory, t) slots over the whole
// dataset, t ranging over steps with an action.
inline AnchorSet build_anchor_set(const std::vector<env::Trajectory>& dataset, std::size_t count,
                                  std::uint64_t seed) {
    std::size_t total = 0;
    for (const auto& t : dataset) total += t.length();
    if (count < 1 || count > total) {
        throw std::invalid_argument("anchors: requested " + std::to_string(count) +
                                    " pairs from " + std::to_string(total) + " available");
    }
    Rng rng(seed);
    std::unordered_set<std::uint64_t> taken;
    AnchorSet out;
    while (out.size() < count) {
        const std::uint64_t slot = rng.uniform_int(total);
        if (!taken.insert(slot).second) continue;
        std::size_t rem = static_cast<std::size_t>(slot);
        std::size_t d = 0;
        while (rem >= dataset[d].length()) {
            rem -= dataset[d].length();
            ++d;
        }
        out.states.push_back(dataset[d].states[rem]);
        out.actions.push_back(dataset[d].actions[rem]);
        out.provenance.emplace_back(d, rem);
    }
    return out;
}

inline void save_anchor_set(const AnchorSet& anchors, const std::string& path) {
    nlohmann::json j;
    j["format"] = "hplb.anchors";
    j["version"] = 1;
    auto rows = nlohmann::json::array();
    auto arows = nlohmann::json::array();
    auto prov = nlohmann::json::array();
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        rows.push_back(std::vector<double>(anchors.states[i].data(),
                                           anchors.states[i].data() + anchors.states[i].size()));
        arows.push_back(std::vector<double>(
            anchors.actions[i].data(), anchors.actions[i].data() + anchors.actions[i].size()));
        prov.push_back({anchors.provenance[i].first, anchors.provenance[i].second});
    }
    j["states"] = std::move(rows);
    j["actions"] = std::move(arows);
    j["provenance"] = std::move(prov);
    save_json_file(j, path);
}

inline AnchorSet load_anchor_set(const std::string& path) {
    const auto j = load_json_file(path);
    if (j.value("format", "") != "hplb.anchors") {
        throw std::runtime_error("anchors: " + path + " is not an anchor set file");
    }
    AnchorSet out;
    for (const auto& row : j.at("states")) {
        Eigen::VectorXd v(row.size());
        Eigen::Index k = 0;
        for (const auto& x : row) v(k++) = x.get<double>();
        out.states.push_back(std::move(v));
    }
    for (const auto& row : j.at("actions")) {
        Eigen::VectorXd v(row.size());
        Eigen::Index k = 0;
        for (const auto& x : row) v(k++) = x.get<double>();
        out.actions.push_back(std::move(v));
    }
    for (const auto& p : j.at("provenance")) {
        out.provenance.emplace_back(p.at(0).get<std::size_t>(), p.at(1).get<std::size_t>());
    }
    return out;
}

}  // namespace hplb::bisim

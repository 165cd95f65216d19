#pragma once

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

#include "hplb/nn/dense.hpp"
#include "hplb/nn/gru.hpp"

namespace hplb::nn {

using nlohmann::json;

// JSON form of a parameterized block: architecture plus one flat parameter
// array in the block's stable index order. Values survive a decimal
// round-trip bit-exactly (writer emits 17 significant digits).

inline json dense_to_json(const DenseNet& net) {
    json j;
    j["dims"] = net.dims();
    std::vector<std::string> acts;
    for (const auto& layer : net.layers()) {
        acts.push_back(layer.act == Activation::Tanh ? "tanh" : "identity");
    }
    j["activations"] = acts;
    std::vector<double> params(net.param_count());
    net.copy_params_to(params);
    j["params"] = params;
    return j;
}

inline DenseNet dense_from_json(const json& j) {
    const auto dims = j.at("dims").get<std::vector<std::size_t>>();
    const auto act_tags = j.at("activations").get<std::vector<std::string>>();
    std::vector<Activation> acts;
    for (const auto& tag : act_tags) {
        if (tag == "tanh") {
            acts.push_back(Activation::Tanh);
        } else if (tag == "identity") {
            acts.push_back(Activation::Identity);
        } else {
            throw std::invalid_argument("dense: unknown activation tag '" + tag + "'");
        }
    }
    DenseNet net(dims, acts);
    const auto params = j.at("params").get<std::vector<double>>();
    if (params.size() != net.param_count()) {
        throw std::invalid_argument("dense: parameter array has " +
                                    std::to_string(params.size()) + " entries, expected " +
                                    std::to_string(net.param_count()));
    }
    net.copy_params_from(params);
    return net;
}

inline json gru_to_json(const GruCell& cell) {
    json j;
    j["input_dim"] = cell.input_dim();
    j["hidden_dim"] = cell.hidden_dim();
    std::vector<double> params(cell.param_count());
    cell.copy_params_to(params);
    j["params"] = params;
    return j;
}

inline GruCell gru_from_json(const json& j) {
    GruCell cell(j.at("input_dim").get<std::size_t>(), j.at("hidden_dim").get<std::size_t>());
    const auto params = j.at("params").get<std::vector<double>>();
    if (params.size() != cell.param_count()) {
        throw std::invalid_argument("gru: parameter array has " + std::to_string(params.size()) +
                                    " entries, expected " + std::to_string(cell.param_count()));
    }
    cell.copy_params_from(params);
    return cell;
}

}  // namespace hplb::nn

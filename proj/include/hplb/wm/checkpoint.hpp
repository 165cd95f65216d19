#pragma once

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

#include "hplb/core/json_io.hpp"
#include "hplb/nn/serialize.hpp"
#include "hplb/wm/training.hpp"
#include "hplb/wm/world_model.hpp"

namespace hplb::wm {

constexpr const char* kCheckpointFormat = "hplb.worldmodel";
constexpr int kCheckpointVersion = 1;

struct Checkpoint {
    WorldModel model;
    TrainConfig config;
    std::vector<double> loss_trace;
    std::string env_id;
};

inline nlohmann::json normalization_to_json(const Normalization& n) {
    auto vec = [](const Eigen::VectorXd& v) {
        return std::vector<double>(v.data(), v.data() + v.size());
    };
    nlohmann::json j;
    j["state_mean"] = vec(n.state_mean);
    j["state_scale"] = vec(n.state_scale);
    j["action_mean"] = vec(n.action_mean);
    j["action_scale"] = vec(n.action_scale);
    j["delta_scale"] = vec(n.delta_scale);
    return j;
}

inline Normalization normalization_from_json(const nlohmann::json& j) {
    auto vec = [&](const char* key) {
        const auto v = j.at(key).get<std::vector<double>>();
        return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()))
            .eval();
    };
    Normalization n;
    n.state_mean = vec("state_mean");
    n.state_scale = vec("state_scale");
    n.action_mean = vec("action_mean");
    n.action_scale = vec("action_scale");
    n.delta_scale = vec("delta_scale");
    n.validate();
    return n;
}

inline void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    nlohmann::json j;
    j["format"] = kCheckpointFormat;
    j["version"] = kCheckpointVersion;
    j["env"] = ckpt.env_id;
    j["mode"] = train_mode_name(ckpt.config.mode);
    j["arch"] = {{"state_dim", ckpt.model.arch().state_dim},
                 {"action_dim", ckpt.model.arch().action_dim},
                 {"memory", ckpt.model.arch().memory},
                 {"encoder_layers", ckpt.model.arch().encoder_layers},
                 {"decoder_hidden", ckpt.model.arch().decoder_hidden}};
    j["normalization"] = normalization_to_json(ckpt.model.normalization());
    j["encoder"] = nn::dense_to_json(ckpt.model.encoder());
    j["gru"] = nn::gru_to_json(ckpt.model.gru());
    j["decoder"] = nn::dense_to_json(ckpt.model.decoder());
    j["train"] = {{"epochs", ckpt.config.epochs},
                  {"batch_size", ckpt.config.batch_size},
                  {"lr", ckpt.config.lr},
                  {"seed", ckpt.config.seed}};
    j["loss_trace"] = ckpt.loss_trace;
    save_json_file(j, path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
    const auto j = load_json_file(path);
    if (j.value("format", "") != kCheckpointFormat) {
        throw std::runtime_error("checkpoint: " + path + " is not a world model checkpoint");
    }
    if (j.value("version", 0) != kCheckpointVersion) {
        throw std::runtime_error("checkpoint: unsupported version in " + path);
    }
    Checkpoint ckpt;
    ckpt.env_id = j.value("env", "");
    const auto& arch_j = j.at("arch");
    WorldModelArch arch;
    arch.state_dim = arch_j.at("state_dim").get<std::size_t>();
    arch.action_dim = arch_j.at("action_dim").get<std::size_t>();
    arch.memory = arch_j.at("memory").get<std::size_t>();
    arch.encoder_layers = arch_j.at("encoder_layers").get<std::vector<std::size_t>>();
    arch.decoder_hidden = arch_j.at("decoder_hidden").get<std::vector<std::size_t>>();
    ckpt.model = WorldModel(arch, normalization_from_json(j.at("normalization")));
    ckpt.model.encoder() = nn::dense_from_json(j.at("encoder"));
    ckpt.model.gru() = nn::gru_from_json(j.at("gru"));
    ckpt.model.decoder() = nn::dense_from_json(j.at("decoder"));
    ckpt.config.mode = train_mode_from_name(j.at("mode").get<std::string>());
    ckpt.config.epochs = j.at("train").at("epochs").get<std::size_t>();
    ckpt.config.batch_size = j.at("train").at("batch_size").get<std::size_t>();
    ckpt.config.lr = j.at("train").at("lr").get<double>();
    ckpt.config.seed = j.at("train").at("seed").get<std::uint64_t>();
    ckpt.config.memory = arch.memory;
    ckpt.config.encoder_layers = arch.encoder_layers;
    ckpt.config.decoder_hidden = arch.decoder_hidden;
    ckpt.loss_trace = j.at("loss_trace").get<std::vector<double>>();
    return ckpt;
}

}  // namespace hplb::wm

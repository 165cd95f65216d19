#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "hplb/bisim/embedding.hpp"
#include "hplb/core/json_io.hpp"
#include "hplb/wm/training.hpp"

namespace hplb::cli {

// One experiment = one environment, one hidden parameter, one output
// directory. Every random choice downstream is derived from the seeds block;
// the config file must spell them out.
struct ExperimentConfig {
    std::string environment;  // mountain-car | arm | drone
    std::string hidden;       // drone: payload | temperature; otherwise optional
    std::string out_dir;

    struct Seeds {
        std::uint64_t data = 0;
        std::uint64_t train_standard = 0;
        std::uint64_t train_time_invariant = 0;
        std::uint64_t embedding = 0;
        std::uint64_t eval = 0;
    } seeds;

    struct Dataset {
        std::size_t train_trajectories = 2000;
        std::size_t eval_train = 30;
        std::size_t eval_test = 100;
        std::size_t length = 60;
    } dataset;

    wm::TrainConfig world_model;  // mode and seed are set per command

    struct Bisim {
        std::size_t anchors = 256;
        std::size_t memories = 512;
        std::size_t min_time = 5;
        std::size_t embedding_dim = 8;
        std::size_t epochs = 500;
        std::size_t minibatches_per_epoch = 8;
        std::size_t pair_batch = 1024;
        double lr = 1e-3;
    } bisim;

    std::size_t knn_k = 5;
    std::size_t threads = 1;

    struct Sweep {
        std::size_t condition_steps = 30;
        std::size_t rollout_steps = 30;
    } sweep;

    // registry id resolved from environment + hidden selection
    std::string env_id() const {
        if (environment == "mountain-car") {
            if (!hidden.empty() && hidden != "gravity") {
                throw std::invalid_argument("config: mountain-car hides gravity only");
            }
            return "mountain-car";
        }
        if (environment == "arm") {
            if (!hidden.empty() && hidden != "strength") {
                throw std::invalid_argument("config: arm hides torque strength only");
            }
            return "arm";
        }
        if (environment == "drone") {
            if (hidden == "payload") return "drone-payload";
            if (hidden == "temperature") return "drone-temperature";
            throw std::invalid_argument(
                "config: drone requires hidden = payload | temperature");
        }
        throw std::invalid_argument("config: unknown environment '" + environment + "'");
    }

    void validate() const {
        env_id();
        if (out_dir.empty()) throw std::invalid_argument("config: out_dir is required");
        if (dataset.train_trajectories == 0 || dataset.eval_train == 0 ||
            dataset.eval_test == 0 || dataset.length < 2) {
            throw std::invalid_argument("config: dataset sizes must be positive, length >= 2");
        }
        world_model.validate();
        if (bisim.anchors == 0 || bisim.memories < 2 || bisim.embedding_dim == 0) {
            throw std::invalid_argument("config: bisim sizes must be positive");
        }
        if (bisim.min_time > dataset.length) {
            throw std::invalid_argument("config: bisim.min_time beyond trajectory length");
        }
        if (knn_k == 0 || knn_k > dataset.eval_train) {
            throw std::invalid_argument("config: knn k must be in [1, eval_train]");
        }
        if (threads == 0) throw std::invalid_argument("config: threads must be positive");
        if (sweep.condition_steps < 2 || sweep.rollout_steps == 0) {
            throw std::invalid_argument("config: sweep lengths too small");
        }
    }
};

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    cfg.environment = j.at("environment").get<std::string>();
    cfg.hidden = j.value("hidden", std::string{});
    cfg.out_dir = j.at("out_dir").get<std::string>();

    // seeds are mandatory and explicit
    const auto& seeds = j.at("seeds");
    cfg.seeds.data = seeds.at("data").get<std::uint64_t>();
    cfg.seeds.train_standard = seeds.at("train_standard").get<std::uint64_t>();
    cfg.seeds.train_time_invariant = seeds.at("train_time_invariant").get<std::uint64_t>();
    cfg.seeds.embedding = seeds.at("embedding").get<std::uint64_t>();
    cfg.seeds.eval = seeds.at("eval").get<std::uint64_t>();

    if (j.contains("dataset")) {
        const auto& d = j.at("dataset");
        cfg.dataset.train_trajectories =
            d.value("train_trajectories", cfg.dataset.train_trajectories);
        cfg.dataset.eval_train = d.value("eval_train", cfg.dataset.eval_train);
        cfg.dataset.eval_test = d.value("eval_test", cfg.dataset.eval_test);
        cfg.dataset.length = d.value("length", cfg.dataset.length);
    }
    if (j.contains("world_model")) {
        const auto& w = j.at("world_model");
        cfg.world_model.memory = w.value("memory", cfg.world_model.memory);
        cfg.world_model.encoder_layers =
            w.value("encoder_layers", cfg.world_model.encoder_layers);
        cfg.world_model.decoder_hidden =
            w.value("decoder_hidden", cfg.world_model.decoder_hidden);
        cfg.world_model.epochs = w.value("epochs", cfg.world_model.epochs);
        cfg.world_model.batch_size = w.value("batch_size", cfg.world_model.batch_size);
        cfg.world_model.lr = w.value("lr", cfg.world_model.lr);
    }
    if (j.contains("bisim")) {
        const auto& b = j.at("bisim");
        cfg.bisim.anchors = b.value("anchors", cfg.bisim.anchors);
        cfg.bisim.memories = b.value("memories", cfg.bisim.memories);
        cfg.bisim.min_time = b.value("min_time", cfg.bisim.min_time);
        cfg.bisim.embedding_dim = b.value("embedding_dim", cfg.bisim.embedding_dim);
        cfg.bisim.epochs = b.value("epochs", cfg.bisim.epochs);
        cfg.bisim.minibatches_per_epoch =
            b.value("minibatches_per_epoch", cfg.bisim.minibatches_per_epoch);
        cfg.bisim.pair_batch = b.value("pair_batch", cfg.bisim.pair_batch);
        cfg.bisim.lr = b.value("lr", cfg.bisim.lr);
    }
    if (j.contains("knn")) cfg.knn_k = j.at("knn").value("k", cfg.knn_k);
    cfg.threads = j.value("threads", cfg.threads);
    if (j.contains("sweep")) {
        const auto& s = j.at("sweep");
        cfg.sweep.condition_steps = s.value("condition_steps", cfg.sweep.condition_steps);
        cfg.sweep.rollout_steps = s.value("rollout_steps", cfg.sweep.rollout_steps);
    }
    cfg.validate();
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    return config_from_json(load_json_file(path));
}

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["environment"] = cfg.environment;
    if (!cfg.hidden.empty()) j["hidden"] = cfg.hidden;
    j["out_dir"] = cfg.out_dir;
    j["seeds"] = {{"data", cfg.seeds.data},
                  {"train_standard", cfg.seeds.train_standard},
                  {"train_time_invariant", cfg.seeds.train_time_invariant},
                  {"embedding", cfg.seeds.embedding},
                  {"eval", cfg.seeds.eval}};
    j["dataset"] = {{"train_trajectories", cfg.dataset.train_trajectories},
                    {"eval_train", cfg.dataset.eval_train},
                    {"eval_test", cfg.dataset.eval_test},
                    {"length", cfg.dataset.length}};
    j["world_model"] = {{"memory", cfg.world_model.memory},
                        {"encoder_layers", cfg.world_model.encoder_layers},
                        {"decoder_hidden", cfg.world_model.decoder_hidden},
                        {"epochs", cfg.world_model.epochs},
                        {"batch_size", cfg.world_model.batch_size},
                        {"lr", cfg.world_model.lr}};
    j["bisim"] = {{"anchors", cfg.bisim.anchors},
                  {"memories", cfg.bisim.memories},
                  {"min_time", cfg.bisim.min_time},
                  {"embedding_dim", cfg.bisim.embedding_dim},
                  {"epochs", cfg.bisim.epochs},
                  {"minibatches_per_epoch", cfg.bisim.minibatches_per_epoch},
                  {"pair_batch", cfg.bisim.pair_batch},
                  {"lr", cfg.bisim.lr}};
    j["knn"] = {{"k", cfg.knn_k}};
    j["threads"] = cfg.threads;
    j["sweep"] = {{"condition_steps", cfg.sweep.condition_steps},
                  {"rollout_steps", cfg.sweep.rollout_steps}};
    return j;
}

}  // namespace hplb::cli

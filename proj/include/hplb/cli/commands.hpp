#pragma once

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "hplb/analysis/error_ratio.hpp"
#include "hplb/analysis/estimation.hpp"
#include "hplb/analysis/feature_set.hpp"
#include "hplb/analysis/pca.hpp"
#include "hplb/analysis/sweep.hpp"
#include "hplb/bisim/anchor_set.hpp"
#include "hplb/bisim/distance.hpp"
#include "hplb/bisim/embedding.hpp"
#include "hplb/cli/config.hpp"
#include "hplb/cli/manifest.hpp"
#include "hplb/core/csv.hpp"
#include "hplb/core/thread_pool.hpp"
#include "hplb/env/dataset.hpp"
#include "hplb/wm/checkpoint.hpp"
#include "hplb/wm/training.hpp"

namespace hplb::cli {

// Exit codes: 0 success, 2 partial success (eval with skipped artifacts),
// 1 error (thrown out of the command).
constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitPartial = 2;

namespace artifact {
constexpr const char* kTrainData = "dataset_train.jsonl";
constexpr const char* kEvalTrainData = "dataset_eval_train.jsonl";
constexpr const char* kEvalTestData = "dataset_eval_test.jsonl";
constexpr const char* kStandardCkpt = "wm_standard.json";
constexpr const char* kStandardLoss = "loss_standard.csv";
constexpr const char* kTimeInvariantCkpt = "wm_time_invariant.json";
constexpr const char* kTimeInvariantLoss = "loss_time_invariant.csv";
constexpr const char* kAnchors = "anchors.json";
constexpr const char* kMemories = "memories.json";
constexpr const char* kDistances = "distances.bin";
constexpr const char* kEmbedding = "embedding.json";
constexpr const char* kStateless = "stateless.json";
constexpr const char* kCurveBaseline = "curve_baseline-memory.csv";
constexpr const char* kCurveTimeInvariant = "curve_time-invariant-memory.csv";
constexpr const char* kCurveEmbedded = "curve_embedded.csv";
constexpr const char* kErrorRatios = "error_ratios.csv";
constexpr const char* kFeaturesEmbedded = "features_embedded.csv";
constexpr const char* kFeaturesPca = "features_pca.csv";
constexpr const char* kSweep = "imagined_sweep.csv";
constexpr const char* kEvalManifest = "eval_manifest.json";
}  // namespace artifact

namespace detail {

inline std::string join(const std::string& dir, const char* name) {
    return (std::filesystem::path(dir) / name).string();
}

inline void refuse_existing(const std::vector<std::string>& paths, bool force) {
    if (force) return;
    for (const auto& p : paths) {
        if (std::filesystem::exists(p)) {
            throw std::runtime_error("refusing to overwrite " + p + " (use --force)");
        }
    }
}

inline void require_file(const std::string& path, const char* produced_by) {
    if (!std::filesystem::exists(path)) {
        throw std::runtime_error(path + " not found; run '" + produced_by + "' first");
    }
}

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

inline void save_loss_csv(const std::vector<double>& trace, const std::string& path) {
    CsvWriter csv(path, {"epoch", "loss"});
    for (std::size_t e = 0; e < trace.size(); ++e) {
        csv.write_row({CsvWriter::num(e), CsvWriter::num(trace[e])});
    }
}

// split salts keep the per-trajectory seed streams of the three dataset
// files disjoint
constexpr std::uint64_t kTrainSplit = 0x7472;
constexpr std::uint64_t kEvalTrainSplit = 0x6574;
constexpr std::uint64_t kEvalTestSplit = 0x6573;

}  // namespace detail

struct CommandOptions {
    bool force = false;
};

inline int cmd_gen_data(const ExperimentConfig& cfg, const CommandOptions& opt) {
    const auto t0 = detail::Stopwatch();
    std::filesystem::create_directories(cfg.out_dir);
    const auto train_path = detail::join(cfg.out_dir, artifact::kTrainData);
    const auto eval_train_path = detail::join(cfg.out_dir, artifact::kEvalTrainData);
    const auto eval_test_path = detail::join(cfg.out_dir, artifact::kEvalTestData);
    detail::refuse_existing({train_path, eval_train_path, eval_test_path}, opt.force);

    auto environment = env::make_environment(cfg.env_id());
    const auto train = env::generate_dataset(*environment, cfg.dataset.train_trajectories,
                                             cfg.dataset.length,
                                             derive_seed(cfg.seeds.data, detail::kTrainSplit));
    const auto eval_train =
        env::generate_dataset(*environment, cfg.dataset.eval_train, cfg.dataset.length,
                              derive_seed(cfg.seeds.data, detail::kEvalTrainSplit));
    const auto eval_test =
        env::generate_dataset(*environment, cfg.dataset.eval_test, cfg.dataset.length,
                              derive_seed(cfg.seeds.data, detail::kEvalTestSplit));
    env::save_dataset(train, train_path);
    env::save_dataset(eval_train, eval_train_path);
    env::save_dataset(eval_test, eval_test_path);

    auto manifest = Manifest::load_or_create(cfg.out_dir, config_to_json(cfg));
    manifest.record_artifact("dataset_train", train_path);
    manifest.record_artifact("dataset_eval_train", eval_train_path);
    manifest.record_artifact("dataset_eval_test", eval_test_path);
    manifest.record_timing("gen-data", t0.seconds());
    manifest.save();
    return kExitOk;
}

inline int cmd_train(const ExperimentConfig& cfg, wm::TrainMode mode,
                     const CommandOptions& opt) {
    const auto t0 = detail::Stopwatch();
    const bool ti = mode == wm::TrainMode::TimeInvariant;
    const auto ckpt_path = detail::join(
        cfg.out_dir, ti ? artifact::kTimeInvariantCkpt : artifact::kStandardCkpt);
    const auto loss_path = detail::join(
        cfg.out_dir, ti ? artifact::kTimeInvariantLoss : artifact::kStandardLoss);
    detail::refuse_existing({ckpt_path, loss_path}, opt.force);
    const auto data_path = detail::join(cfg.out_dir, artifact::kTrainData);
    detail::require_file(data_path, "gen-data");

    const auto dataset = env::load_dataset(data_path);
    wm::TrainConfig train_cfg = cfg.world_model;
    train_cfg.mode = mode;
    train_cfg.seed = ti ? cfg.seeds.train_time_invariant : cfg.seeds.train_standard;
    ThreadPool pool(cfg.threads);
    auto result = wm::train_world_model(dataset, train_cfg, pool);

    wm::Checkpoint ckpt;
    ckpt.model = std::move(result.model);
    ckpt.config = train_cfg;
    ckpt.loss_trace = result.loss_trace;
    ckpt.env_id = cfg.env_id();
    wm::save_checkpoint(ckpt, ckpt_path);
    detail::save_loss_csv(result.loss_trace, loss_path);

    auto manifest = Manifest::load_or_create(cfg.out_dir, config_to_json(cfg));
    manifest.record_artifact(ti ? "wm_time_invariant" : "wm_standard", ckpt_path);
    manifest.record_artifact(ti ? "loss_time_invariant" : "loss_standard", loss_path);
    manifest.record_metric(std::string("final_loss_") + wm::train_mode_name(mode),
                           result.loss_trace.back());
    manifest.record_timing(std::string("train-") + wm::train_mode_name(mode), t0.seconds());
    manifest.save();
    return kExitOk;
}

inline int cmd_embed(const ExperimentConfig& cfg, const CommandOptions& opt) {
    const auto t0 = detail::Stopwatch();
    const auto anchors_path = detail::join(cfg.out_dir, artifact::kAnchors);
    const auto memories_path = detail::join(cfg.out_dir, artifact::kMemories);
    const auto distances_path = detail::join(cfg.out_dir, artifact::kDistances);
    const auto embedding_path = detail::join(cfg.out_dir, artifact::kEmbedding);
    detail::refuse_existing({anchors_path, memories_path, distances_path, embedding_path},
                            opt.force);
    const auto data_path = detail::join(cfg.out_dir, artifact::kTrainData);
    const auto ckpt_path = detail::join(cfg.out_dir, artifact::kTimeInvariantCkpt);
    detail::require_file(data_path, "gen-data");
    detail::require_file(ckpt_path, "train --mode time-invariant");

    const auto dataset = env::load_dataset(data_path);
    const auto ckpt = wm::load_checkpoint(ckpt_path);
    ThreadPool pool(cfg.threads);

    const auto anchors = bisim::build_anchor_set(dataset, cfg.bisim.anchors,
                                                 derive_seed(cfg.seeds.embedding, 0xA0C0));
    const auto memories =
        bisim::sample_memories(ckpt.model, dataset, cfg.bisim.memories, cfg.bisim.min_time,
                               derive_seed(cfg.seeds.embedding, 0x3E30), pool);
    auto distances = bisim::pairwise_distance(ckpt.model, anchors, memories, pool);
    for (std::size_t idx : distances.excluded) {
        std::cerr << "warning: memory sample " << idx
                  << " produced non-finite predictions and was excluded\n";
    }

    bisim::EmbeddingTrainConfig embed_cfg;
    embed_cfg.dim = cfg.bisim.embedding_dim;
    embed_cfg.epochs = cfg.bisim.epochs;
    embed_cfg.minibatches_per_epoch = cfg.bisim.minibatches_per_epoch;
    embed_cfg.pair_batch = cfg.bisim.pair_batch;
    embed_cfg.lr = cfg.bisim.lr;
    embed_cfg.seed = derive_seed(cfg.seeds.embedding, 0x7E17);
    const auto embed_res = bisim::train_embedding(distances, embed_cfg);

    bisim::save_anchor_set(anchors, anchors_path);
    bisim::save_memories(distances.memories, memories_path);
    bisim::save_distance_matrix(distances.d, distances_path);
    bisim::save_embedding(embed_res.model, embedding_path, embed_res.train_stress,
                          embed_res.holdout_stress);

    auto manifest = Manifest::load_or_create(cfg.out_dir, config_to_json(cfg));
    manifest.record_artifact("anchors", anchors_path);
    manifest.record_artifact("memories", memories_path);
    manifest.record_artifact("distances", distances_path);
    manifest.record_artifact("embedding", embedding_path);
    manifest.record_metric("embed.train_stress", embed_res.train_stress);
    manifest.record_metric("embed.holdout_stress", embed_res.holdout_stress);
    manifest.record_metric("embed.holdout_mean_distance", embed_res.holdout_mean_distance);
    manifest.record_timing("embed", t0.seconds());
    manifest.save();
    return kExitOk;
}

inline int cmd_eval(const ExperimentConfig& cfg, const CommandOptions& opt) {
    const auto t0 = detail::Stopwatch();
    const auto eval_train_path = detail::join(cfg.out_dir, artifact::kEvalTrainData);
    const auto eval_test_path = detail::join(cfg.out_dir, artifact::kEvalTestData);
    detail::require_file(eval_train_path, "gen-data");
    detail::require_file(eval_test_path, "gen-data");

    const std::vector<std::string> outputs = {
        detail::join(cfg.out_dir, artifact::kCurveBaseline),
        detail::join(cfg.out_dir, artifact::kCurveTimeInvariant),
        detail::join(cfg.out_dir, artifact::kCurveEmbedded),
        detail::join(cfg.out_dir, artifact::kErrorRatios),
        detail::join(cfg.out_dir, artifact::kFeaturesEmbedded),
        detail::join(cfg.out_dir, artifact::kFeaturesPca),
        detail::join(cfg.out_dir, artifact::kSweep),
        detail::join(cfg.out_dir, artifact::kStateless),
        detail::join(cfg.out_dir, artifact::kEvalManifest)};
    detail::refuse_existing(outputs, opt.force);

    auto environment = env::make_environment(cfg.env_id());
    const auto eval_train = env::load_dataset(eval_train_path);
    const auto eval_test = env::load_dataset(eval_test_path);
    const auto task = environment->hidden_spec().kind == env::HiddenParamSpec::Kind::Discrete
                          ? analysis::Task::Discrete
                          : analysis::Task::Continuous;
    ThreadPool pool(cfg.threads);

    std::optional<wm::Checkpoint> standard, time_invariant;
    std::optional<bisim::EmbeddingModel> embedding;
    const auto std_path = detail::join(cfg.out_dir, artifact::kStandardCkpt);
    const auto ti_path = detail::join(cfg.out_dir, artifact::kTimeInvariantCkpt);
    const auto emb_path = detail::join(cfg.out_dir, artifact::kEmbedding);
    if (std::filesystem::exists(std_path)) standard = wm::load_checkpoint(std_path);
    if (std::filesystem::exists(ti_path)) time_invariant = wm::load_checkpoint(ti_path);
    if (std::filesystem::exists(emb_path)) embedding = bisim::load_embedding(emb_path);

    bool partial = false;
    auto manifest = Manifest::load_or_create(cfg.out_dir, config_to_json(cfg));
    nlohmann::json sidecar;
    sidecar["format"] = "hplb.eval";
    sidecar["version"] = 1;
    sidecar["config"] = config_to_json(cfg);
    sidecar["checkpoints"] = nlohmann::json::object();
    auto emitted = nlohmann::json::array();

    auto emit_curve = [&](const analysis::FeatureSet& train_fs, const analysis::FeatureSet& test_fs,
                          const char* name, const char* artifact_key) {
        const auto curve = analysis::estimation_curve(train_fs, test_fs, cfg.knn_k, task,
                                                      environment->hidden_spec());
        const auto path = detail::join(cfg.out_dir, name);
        analysis::save_curve_csv(curve, path);
        manifest.record_artifact(artifact_key, path);
        emitted.push_back(name);
    };

    if (standard) {
        sidecar["checkpoints"]["standard"] = sha256_file(std_path);
        const auto train_fs = analysis::build_feature_set(
            standard->model, eval_train, analysis::FeatureKind::BaselineMemory, nullptr, pool);
        const auto test_fs = analysis::build_feature_set(
            standard->model, eval_test, analysis::FeatureKind::BaselineMemory, nullptr, pool);
        emit_curve(train_fs, test_fs, artifact::kCurveBaseline, "curve_baseline");
    } else {
        std::cerr << "warning: " << std_path << " missing; baseline curve skipped\n";
        partial = true;
    }

    if (time_invariant) {
        sidecar["checkpoints"]["time_invariant"] = sha256_file(ti_path);
        const auto train_fs =
            analysis::build_feature_set(time_invariant->model, eval_train,
                                        analysis::FeatureKind::TimeInvariantMemory, nullptr, pool);
        const auto test_fs =
            analysis::build_feature_set(time_invariant->model, eval_test,
                                        analysis::FeatureKind::TimeInvariantMemory, nullptr, pool);
        emit_curve(train_fs, test_fs, artifact::kCurveTimeInvariant, "curve_time_invariant");
    } else {
        std::cerr << "warning: " << ti_path << " missing; time-invariant curve skipped\n";
        partial = true;
    }

    if (time_invariant && embedding) {
        sidecar["checkpoints"]["embedding"] = sha256_file(emb_path);
        const auto train_fs =
            analysis::build_feature_set(time_invariant->model, eval_train,
                                        analysis::FeatureKind::Embedded, &*embedding, pool);
        const auto test_fs = analysis::build_feature_set(
            time_invariant->model, eval_test, analysis::FeatureKind::Embedded, &*embedding, pool);
        emit_curve(train_fs, test_fs, artifact::kCurveEmbedded, "curve_embedded");

        // feature export + top-2 projection at the final step
        const auto features_path = detail::join(cfg.out_dir, artifact::kFeaturesEmbedded);
        analysis::export_features_csv(test_fs, {cfg.dataset.length}, features_path);
        manifest.record_artifact("features_embedded", features_path);
        emitted.push_back(artifact::kFeaturesEmbedded);

        const auto pca = analysis::pca_project(test_fs.at_time(cfg.dataset.length));
        if (pca.rank_deficient) {
            std::cerr << "warning: embedded features are rank-deficient; "
                      << pca.coords.cols() << " principal component(s) emitted\n";
        }
        const auto pca_path = detail::join(cfg.out_dir, artifact::kFeaturesPca);
        analysis::save_pca_csv(test_fs, cfg.dataset.length, pca, pca_path);
        manifest.record_artifact("features_pca", pca_path);
        emitted.push_back(artifact::kFeaturesPca);
    } else {
        std::cerr << "warning: embedding artifacts missing; embedded curve and feature export "
                     "skipped\n";
        partial = true;
    }

    if (standard) {
        const auto train_data_path = detail::join(cfg.out_dir, artifact::kTrainData);
        detail::require_file(train_data_path, "gen-data");
        const auto train_data = env::load_dataset(train_data_path);
        wm::TrainConfig mlp_cfg = cfg.world_model;
        mlp_cfg.seed = cfg.seeds.eval;
        const auto stateless = analysis::train_stateless_model(train_data, mlp_cfg, pool);
        const auto stateless_path = detail::join(cfg.out_dir, artifact::kStateless);
        analysis::save_stateless_model(stateless, stateless_path);
        manifest.record_artifact("stateless", stateless_path);
        emitted.push_back(artifact::kStateless);

        const auto table = analysis::error_ratio_table(eval_test, standard->model, stateless,
                                                       environment->feature_names(),
                                                       environment->report_dim());
        const auto table_path = detail::join(cfg.out_dir, artifact::kErrorRatios);
        analysis::save_error_ratio_csv(table, table_path);
        manifest.record_artifact("error_ratios", table_path);
        emitted.push_back(artifact::kErrorRatios);
    } else {
        std::cerr << "warning: error-ratio table skipped without the standard checkpoint\n";
        partial = true;
    }

    if (time_invariant) {
        const auto& spec = environment->hidden_spec();
        std::vector<double> values;
        if (spec.kind == env::HiddenParamSpec::Kind::Discrete) {
            values = spec.support;
        } else {
            values = {spec.low, 0.5 * (spec.low + spec.high), spec.high};
        }
        const std::uint64_t sweep_seed = derive_seed(cfg.seeds.eval, 0x53E3);
        const auto actions = analysis::default_sweep_actions(
            *environment, cfg.sweep.rollout_steps, derive_seed(sweep_seed, 0xAC));
        const auto sweep =
            analysis::imagine_sweep(time_invariant->model, *environment, Eigen::VectorXd(),
                                    actions, values, cfg.sweep.condition_steps, sweep_seed);
        const auto sweep_path = detail::join(cfg.out_dir, artifact::kSweep);
        analysis::save_sweep_csv(sweep, environment->feature_names(), sweep_path);
        manifest.record_artifact("imagined_sweep", sweep_path);
        emitted.push_back(artifact::kSweep);
    } else {
        std::cerr << "warning: imagined sweep skipped without the time-invariant checkpoint\n";
        partial = true;
    }

    sidecar["artifacts"] = emitted;
    const auto sidecar_path = detail::join(cfg.out_dir, artifact::kEvalManifest);
    save_json_file(sidecar, sidecar_path);
    manifest.record_artifact("eval_manifest", sidecar_path);
    manifest.record_timing("eval", t0.seconds());
    manifest.save();
    return partial ? kExitPartial : kExitOk;
}

inline int cmd_all(const ExperimentConfig& cfg, const CommandOptions& opt) {
    int rc = cmd_gen_data(cfg, opt);
    if (rc != kExitOk) return rc;
    rc = cmd_train(cfg, wm::TrainMode::Standard, opt);
    if (rc != kExitOk) return rc;
    rc = cmd_train(cfg, wm::TrainMode::TimeInvariant, opt);
    if (rc != kExitOk) return rc;
    rc = cmd_embed(cfg, opt);
    if (rc != kExitOk) return rc;
    return cmd_eval(cfg, opt);
}

}  // namespace hplb::cli

// Command-line driver for the hidden-parameter trajectory analysis pipeline:
//   gen-data -> train (standard / time-invariant) -> embed -> eval
// Every run is fully determined by the config file's seeds.

#include <CLI11.hpp>

#include <exception>
#include <iostream>
#include <string>

#include "hplb/cli/commands.hpp"
#include "hplb/cli/config.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir_override;
    std::size_t threads_override = 0;
    bool force = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "experiment config JSON")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", args.out_dir_override, "override the config's output directory")
        ->envname("HPLB_OUT_DIR");
    cmd->add_option("--threads", args.threads_override, "worker threads (default from config)")
        ->envname("HPLB_THREADS");
    cmd->add_flag("--force", args.force, "overwrite existing outputs");
}

hplb::cli::ExperimentConfig resolve(const CommonArgs& args) {
    auto cfg = hplb::cli::load_config(args.config_path);
    if (!args.out_dir_override.empty()) cfg.out_dir = args.out_dir_override;
    if (args.threads_override > 0) cfg.threads = args.threads_override;
    cfg.validate();
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hplb: hidden-parameter trajectory features via time-invariant "
                 "world-model memory and latent bisimulation embedding"};
    app.require_subcommand(1);

    CommonArgs gen_args, train_args, embed_args, eval_args, all_args;
    std::string train_mode = "standard";

    auto* gen = app.add_subcommand("gen-data", "generate train/eval trajectory datasets");
    add_common(gen, gen_args);
    auto* train = app.add_subcommand("train", "train a world model on the generated dataset");
    add_common(train, train_args);
    train->add_option("--mode", train_mode, "training algorithm")
        ->required()
        ->check(CLI::IsMember({"standard", "time-invariant"}));
    auto* embed = app.add_subcommand("embed", "build the distance dataset and train the embedding");
    add_common(embed, embed_args);
    auto* eval = app.add_subcommand("eval", "emit estimation curves, tables, and exports");
    add_common(eval, eval_args);
    auto* all = app.add_subcommand("all", "run the full pipeline");
    add_common(all, all_args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            return hplb::cli::cmd_gen_data(resolve(gen_args), {gen_args.force});
        }
        if (train->parsed()) {
            return hplb::cli::cmd_train(resolve(train_args),
                                        hplb::wm::train_mode_from_name(train_mode),
                                        {train_args.force});
        }
        if (embed->parsed()) {
            return hplb::cli::cmd_embed(resolve(embed_args), {embed_args.force});
        }
        if (eval->parsed()) {
            return hplb::cli::cmd_eval(resolve(eval_args), {eval_args.force});
        }
        if (all->parsed()) {
            return hplb::cli::cmd_all(resolve(all_args), {all_args.force});
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return hplb::cli::kExitError;
    }
    return hplb::cli::kExitError;
}

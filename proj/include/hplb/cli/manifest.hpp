#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>

#include "hplb/core/hash.hpp"
#include "hplb/core/json_io.hpp"

namespace hplb::cli {

constexpr const char* kToolVersion = "1.0.0";

// Run ledger for one experiment directory: config snapshot, a checksum per
// emitted artifact, and wall-clock timings per command. The checksum table is
// the reproducibility contract; timings are informational.
class Manifest {
public:
    static Manifest load_or_create(const std::string& out_dir,
                                   const nlohmann::json& config_snapshot) {
        Manifest m;
        m.path_ = (std::filesystem::path(out_dir) / "manifest.json").string();
        if (std::filesystem::exists(m.path_)) {
            m.j_ = load_json_file(m.path_);
        } else {
            m.j_["format"] = "hplb.manifest";
            m.j_["version"] = 1;
            m.j_["artifacts"] = nlohmann::json::object();
            m.j_["timings"] = nlohmann::json::object();
            m.j_["metrics"] = nlohmann::json::object();
        }
        m.j_["tool_version"] = kToolVersion;
        m.j_["config"] = config_snapshot;
        m.j_["config_sha256"] = sha256_hex(dump_json_g17(config_snapshot));
        return m;
    }

    void record_artifact(const std::string& name, const std::string& path) {
        nlohmann::json entry;
        entry["path"] = std::filesystem::path(path).filename().string();
        entry["sha256"] = sha256_file(path);
        entry["bytes"] = static_cast<std::uint64_t>(std::filesystem::file_size(path));
        j_["artifacts"][name] = entry;
    }

    void record_timing(const std::string& name, double seconds) {
        j_["timings"][name] = seconds;
    }

    void record_metric(const std::string& name, double value) {
        j_["metrics"][name] = value;
    }

    const nlohmann::json& json() const { return j_; }

    void save() const { save_json_file(j_, path_); }

private:
    std::string path_;
    nlohmann::json j_;
};

}  // namespace hplb::cli

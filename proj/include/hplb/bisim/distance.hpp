#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hplb/bisim/anchor_set.hpp"
#include "hplb/core/json_io.hpp"
#include "hplb/core/rng.hpp"
#include "hplb/core/thread_pool.hpp"
#include "hplb/env/trajectory.hpp"
#include "hplb/wm/encode.hpp"
#include "hplb/wm/world_model.hpp"

namespace hplb::bisim {

struct MemorySample {
    Eigen::VectorXd h;
    std::size_t trajectory = 0;
    std::size_t time = 0;
    double hidden = 0.0;  // evaluation-only label carried for reporting
};

// Memory vectors with provenance plus the pairwise behavioral distance
// matrix: d(i,j) is the average L1 difference between the model's one-step
// predictions under memory i and memory j across the anchor set. An average
// of L1 distances between fixed vectors, so a pseudometric by construction.
struct DistanceDataset {
    std::vector<MemorySample> memories;
    Eigen::MatrixXd d;
    std::vector<std::size_t> excluded;  // memory indices dropped for non-finite predictions
};

// Uniform memory samples over (trajectory, t) with t >= min_time; early
// near-empty memories would otherwise dominate the dataset.
inline std::vector<MemorySample> sample_memories(const wm::WorldModel& model,
                                                 const std::vector<env::Trajectory>& dataset,
                                                 std::size_t count, std::size_t min_time,
                                                 std::uint64_t seed, ThreadPool& pool) {
    if (dataset.empty()) throw std::invalid_argument("memories: empty dataset");
    const std::size_t horizon = dataset[0].length();
    if (min_time > horizon) throw std::invalid_argument("memories: min_time beyond trajectory");
    Rng rng(seed);
    std::vector<MemorySample> out(count);
    for (auto& m : out) {
        m.trajectory = static_cast<std::size_t>(rng.uniform_int(dataset.size()));
        const std::size_t span = dataset[m.trajectory].length() - min_time + 1;
        m.time = min_time + static_cast<std::size_t>(rng.uniform_int(span));
        m.hidden = dataset[m.trajectory].hidden;
    }
    pool.parallel_for(count, [&](std::size_t i) {
        out[i].h = wm::encode_trajectory(model, dataset[out[i].trajectory], out[i].time);
    });
    return out;
}

// Pairwise distances via Eq.-style averaging of prediction differences. The
// encoder pass depends only on the anchor, so it is shared across memories.
inline DistanceDataset pairwise_distance(const wm::WorldModel& model, const AnchorSet& anchors,
                                         const std::vector<MemorySample>& memories,
                                         ThreadPool& pool) {
    if (anchors.size() == 0) throw std::invalid_argument("distance: empty anchor set");
    const std::size_t p_count = anchors.size();
    const auto sd = static_cast<Eigen::Index>(model.state_dim());

    std::vector<Eigen::VectorXd> encodings(p_count);
    pool.parallel_for(p_count, [&](std::size_t p) {
        nn::DenseNet::Cache cache;
        encodings[p] = model.encoder().forward(
            model.normalized_input(anchors.states[p], anchors.actions[p]), cache);
    });

    // predictions[i] is (state_dim x P) for memory i, in raw state units
    const std::size_t h_count = memories.size();
    std::vector<Eigen::MatrixXd> predictions(h_count);
    std::vector<char> finite(h_count, 1);
    pool.parallel_for(h_count, [&](std::size_t i) {
        Eigen::MatrixXd pred(sd, static_cast<Eigen::Index>(p_count));
        nn::GruCell::Cache gru_cache;
        nn::DenseNet::Cache dec_cache;
        Eigen::VectorXd dec_in(model.memory_dim() + model.encoding_dim());
        for (std::size_t p = 0; p < p_count; ++p) {
            const Eigen::VectorXd& h_next =
                model.gru().step(encodings[p], memories[i].h, gru_cache);
            dec_in.head(static_cast<Eigen::Index>(model.memory_dim())) = h_next;
            dec_in.tail(static_cast<Eigen::Index>(model.encoding_dim())) = encodings[p];
            const Eigen::VectorXd& delta = model.decoder().forward(dec_in, dec_cache);
            pred.col(static_cast<Eigen::Index>(p)) =
                anchors.states[p] + delta.cwiseProduct(model.normalization().delta_scale);
        }
        finite[i] = pred.allFinite() ? 1 : 0;
        predictions[i] = std::move(pred);
    });

    DistanceDataset out;
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < h_count; ++i) {
        if (finite[i]) {
            kept.push_back(i);
            out.memories.push_back(memories[i]);
        } else {
            out.excluded.push_back(i);
        }
    }

    const std::size_t n = kept.size();
    out.d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    pool.parallel_for(n, [&](std::size_t a) {
        const auto& pa = predictions[kept[a]];
        for (std::size_t b = a + 1; b < n; ++b) {
            const double dist = (pa - predictions[kept[b]]).cwiseAbs().sum() /
                                static_cast<double>(p_count);
            out.d(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = dist;
            out.d(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = dist;
        }
    });
    return out;
}

constexpr char kDistanceMagic[8] = {'H', 'P', 'L', 'B', 'D', 'M', '0', '1'};

// Dense binary layout: 8-byte magic, two little-endian u32 dimensions,
// row-major 64-bit floats.
inline void save_distance_matrix(const Eigen::MatrixXd& d, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("distance: cannot open " + path + " for writing");
    out.write(kDistanceMagic, 8);
    const std::uint32_t rows = static_cast<std::uint32_t>(d.rows());
    const std::uint32_t cols = static_cast<std::uint32_t>(d.cols());
    out.write(reinterpret_cast<const char*>(&rows), 4);
    out.write(reinterpret_cast<const char*>(&cols), 4);
    for (Eigen::Index i = 0; i < d.rows(); ++i) {
        for (Eigen::Index j = 0; j < d.cols(); ++j) {
            const double v = d(i, j);
            out.write(reinterpret_cast<const char*>(&v), 8);
        }
    }
    if (!out) throw std::runtime_error("distance: write to " + path + " failed");
}

inline Eigen::MatrixXd load_distance_matrix(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("distance: cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kDistanceMagic, 8) != 0) {
        throw std::runtime_error("distance: " + path + " has the wrong magic header");
    }
    std::uint32_t rows = 0, cols = 0;
    in.read(reinterpret_cast<char*>(&rows), 4);
    in.read(reinterpret_cast<char*>(&cols), 4);
    Eigen::MatrixXd d(rows, cols);
    for (std::uint32_t i = 0; i < rows; ++i) {
        for (std::uint32_t j = 0; j < cols; ++j) {
            double v = 0;
            in.read(reinterpret_cast<char*>(&v), 8);
            d(i, j) = v;
        }
    }
    if (!in) throw std::runtime_error("distance: " + path + " truncated");
    return d;
}

inline void save_memories(const std::vector<MemorySample>& memories, const std::string& path) {
    nlohmann::json j;
    j["format"] = "hplb.memories";
    j["version"] = 1;
    auto vecs = nlohmann::json::array();
    auto prov = nlohmann::json::array();
    auto hidden = nlohmann::json::array();
    for (const auto& m : memories) {
        vecs.push_back(std::vector<double>(m.h.data(), m.h.data() + m.h.size()));
        prov.push_back({m.trajectory, m.time});
        hidden.push_back(m.hidden);
    }
    j["memories"] = std::move(vecs);
    j["provenance"] = std::move(prov);
    j["hidden"] = std::move(hidden);
    save_json_file(j, path);
}

inline std::vector<MemorySample> load_memories(const std::string& path) {
    const auto j = load_json_file(path);
    if (j.value("format", "") != "hplb.memories") {
        throw std::runtime_error("memories: " + path + " is not a memory sample file");
    }
    std::vector<MemorySample> out;
    const auto& vecs = j.at("memories");
    const auto& prov = j.at("provenance");
    const auto& hidden = j.at("hidden");
    for (std::size_t i = 0; i < vecs.size(); ++i) {
        MemorySample m;
        const auto& row = vecs[i];
        m.h.resize(static_cast<Eigen::Index>(row.size()));
        Eigen::Index k = 0;
        for (const auto& x : row) m.h(k++) = x.get<double>();
        m.trajectory = prov[i].at(0).get<std::size_t>();
        m.time = prov[i].at(1).get<std::size_t>();
        m.hidden = hidden[i].get<double>();
        out.push_back(std::move(m));
    }
    return out;
}

}  // namespace hplb::bisim

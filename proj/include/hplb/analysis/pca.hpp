#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <stdexcept>
#include <string>
#include <vector>

#include "hplb/analysis/feature_set.hpp"
#include "hplb/core/csv.hpp"

namespace hplb::analysis {

struct PcaResult {
    Eigen::MatrixXd coords;       // n x components
    Eigen::MatrixXd components;   // dim x components, unit columns
    Eigen::VectorXd eigenvalues;  // descending, one per emitted component
    bool rank_deficient = false;
};

// Top-2 principal components via eigendecomposition of the feature
// covariance. Sign convention: the largest-magnitude loading of each
// component is positive (lowest index on magnitude ties), so projections are
// reproducible. Rank-deficient inputs yield fewer components and a flag.
inline PcaResult pca_project(const Eigen::MatrixXd& rows, std::size_t max_components = 2) {
    if (rows.rows() < 2) throw std::invalid_argument("pca: need at least 2 samples");
    const Eigen::Index n = rows.rows();
    const Eigen::Index d = rows.cols();
    Eigen::RowVectorXd mean = rows.colwise().mean();
    Eigen::MatrixXd centered = rows.rowwise() - mean;
    Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw std::runtime_error("pca: eigensolver failed");
    const Eigen::VectorXd evals = solver.eigenvalues();  // ascending
    const double max_eval = evals(d - 1);
    const double tol = std::max(max_eval, 0.0) * 1e-12 + 1e-300;

    const std::size_t want = std::min<std::size_t>(max_components, static_cast<std::size_t>(d));
    PcaResult res;
    std::vector<Eigen::Index> picked;
    for (Eigen::Index i = d - 1; i >= 0 && picked.size() < want; --i) {
        if (evals(i) > tol) picked.push_back(i);
    }
    res.rank_deficient = picked.size() < want;

    res.components.resize(d, static_cast<Eigen::Index>(picked.size()));
    res.eigenvalues.resize(static_cast<Eigen::Index>(picked.size()));
    for (std::size_t c = 0; c < picked.size(); ++c) {
        Eigen::VectorXd v = solver.eigenvectors().col(picked[c]);
        Eigen::Index lead = 0;
        for (Eigen::Index i = 1; i < d; ++i) {
            if (std::abs(v(i)) > std::abs(v(lead))) lead = i;
        }
        if (v(lead) < 0.0) v = -v;
        res.components.col(static_cast<Eigen::Index>(c)) = v;
        res.eigenvalues(static_cast<Eigen::Index>(c)) = evals(picked[c]);
    }
    res.coords = centered * res.components;
    return res;
}

// Flat CSV of every (trajectory, time) feature row with its label, for
// external dimensionality-reduction or plotting tools.
inline void export_features_csv(const FeatureSet& set, const std::vector<std::size_t>& times,
                                const std::string& path) {
    std::vector<std::string> header = {"trajectory", "step", "hidden"};
    for (std::size_t f = 0; f < set.dim(); ++f) header.push_back("f" + std::to_string(f));
    CsvWriter csv(path, header);
    for (std::size_t i = 0; i < set.trajectories(); ++i) {
        for (const std::size_t t : times) {
            std::vector<std::string> row = {CsvWriter::num(i), CsvWriter::num(t),
                                            CsvWriter::num(set.labels(static_cast<Eigen::Index>(i)))};
            for (std::size_t f = 0; f < set.dim(); ++f) {
                row.push_back(CsvWriter::num(
                    set.features[i](static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(f))));
            }
            csv.write_row(row);
        }
    }
}

inline void save_pca_csv(const FeatureSet& set, std::size_t time, const PcaResult& pca,
                         const std::string& path) {
    std::vector<std::string> header = {"trajectory", "step", "hidden"};
    for (Eigen::Index c = 0; c < pca.coords.cols(); ++c) {
        header.push_back("pc" + std::to_string(c + 1));
    }
    CsvWriter csv(path, header);
    for (Eigen::Index i = 0; i < pca.coords.rows(); ++i) {
        std::vector<std::string> row = {CsvWriter::num(static_cast<std::size_t>(i)),
                                        CsvWriter::num(time), CsvWriter::num(set.labels(i))};
        for (Eigen::Index c = 0; c < pca.coords.cols(); ++c) {
            row.push_back(CsvWriter::num(pca.coords(i, c)));
        }
        csv.write_row(row);
    }
}

}  // namespace hplb::analysis

#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "hplb/analysis/error_ratio.hpp"
#include "hplb/analysis/estimation.hpp"
#include "hplb/analysis/feature_set.hpp"
#include "hplb/analysis/knn.hpp"
#include "hplb/analysis/pca.hpp"
#include "hplb/analysis/sweep.hpp"
#include "hplb/env/dataset.hpp"
#include "hplb/wm/training.hpp"

using namespace hplb;
using Catch::Approx;

namespace {

Eigen::MatrixXd col(std::initializer_list<double> xs) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(xs.size()), 1);
    Eigen::Index i = 0;
    for (double x : xs) m(i++, 0) = x;
    return m;
}

Eigen::VectorXd vec(std::initializer_list<double> xs) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

}  // namespace

TEST_CASE("knn: a single training point answers every query") {
    auto train = col({3.0});
    auto labels = vec({1.25});
    auto queries = col({-100.0, 0.0, 55.0});
    auto preds = analysis::knn_estimate(train, labels, queries, 1, analysis::Task::Discrete);
    for (double p : preds) CHECK(p == 1.25);
}

TEST_CASE("knn: querying an exact training point with k=1 returns its label") {
    auto train = col({0.0, 1.0, 2.0});
    auto labels = vec({5.0, 6.0, 7.0});
    auto preds = analysis::knn_estimate(train, labels, col({1.0}), 1, analysis::Task::Discrete);
    CHECK(preds[0] == 6.0);
}

TEST_CASE("knn: five-point line dataset with k=3 matches the hand evaluation") {
    auto train = col({0.0, 1.0, 2.0, 3.0, 10.0});
    auto labels = vec({0.0, 0.0, 1.0, 1.0, 1.0});
    auto queries = col({1.4, 2.6, 6.5});

    auto preds = analysis::knn_estimate(train, labels, queries, 3, analysis::Task::Discrete);
    // 1.4 -> neighbors {1, 2, 0}: two votes for 0
    CHECK(preds[0] == 0.0);
    // 2.6 -> neighbors {3, 2, 1}: two votes for 1
    CHECK(preds[1] == 1.0);
    // 6.5 -> neighbors {3, 4, 2}: unanimous
    CHECK(preds[2] == 1.0);

    auto means = analysis::knn_estimate(train, labels, queries, 3, analysis::Task::Continuous);
    CHECK(means[0] == Approx(1.0 / 3.0));
    CHECK(means[1] == Approx(2.0 / 3.0));
    CHECK(means[2] == 1.0);
}

TEST_CASE("knn: vote ties go to the nearest qualifying neighbor") {
    auto train = col({0.0, 2.0});
    auto labels = vec({0.0, 1.0});
    auto preds = analysis::knn_estimate(train, labels, col({1.0}), 2, analysis::Task::Discrete);
    CHECK(preds[0] == 0.0);
}

TEST_CASE("knn: distance ties at the k-th neighbor are all included") {
    auto train = col({0.0, 1.0, 2.0, 2.0});
    auto labels = vec({0.0, 1.0, 1.0, 0.0});
    auto preds = analysis::knn_estimate(train, labels, col({2.0}), 2, analysis::Task::Discrete);
    // both points at distance zero vote, 1 vs 0 ties, nearest in stable order wins
    CHECK(preds[0] == 1.0);
}

TEST_CASE("knn: all-identical features vote over the whole training set") {
    Eigen::MatrixXd train = Eigen::MatrixXd::Zero(5, 3);
    auto labels = vec({1.0, 0.0, 1.0, 1.0, 0.0});
    Eigen::MatrixXd queries = Eigen::MatrixXd::Zero(2, 3);
    auto preds = analysis::knn_estimate(train, labels, queries, 2, analysis::Task::Discrete);
    CHECK(preds[0] == 1.0);  // global majority
    CHECK(preds[1] == 1.0);
}

TEST_CASE("knn: k=1 on the training set itself is perfect") {
    Rng rng(41);
    Eigen::MatrixXd train(20, 4);
    Eigen::VectorXd labels(20);
    for (Eigen::Index i = 0; i < 20; ++i) {
        for (Eigen::Index j = 0; j < 4; ++j) train(i, j) = rng.uniform(-1.0, 1.0);
        labels(i) = static_cast<double>(i % 3);
    }
    auto preds = analysis::knn_estimate(train, labels, train, 1, analysis::Task::Discrete);
    for (Eigen::Index i = 0; i < 20; ++i) REQUIRE(preds[static_cast<std::size_t>(i)] == labels(i));
}

TEST_CASE("knn: structural errors") {
    auto train = col({0.0, 1.0});
    auto labels = vec({0.0, 1.0});
    CHECK_THROWS_AS(analysis::knn_estimate(train, labels, col({0.5}), 3, analysis::Task::Discrete),
                    std::invalid_argument);
    Eigen::MatrixXd wide(1, 2);
    wide << 0.0, 1.0;
    CHECK_THROWS_AS(analysis::knn_estimate(train, labels, wide, 1, analysis::Task::Discrete),
                    std::invalid_argument);
}

TEST_CASE("knn: predictions are invariant to training order") {
    Rng rng(59);
    Eigen::MatrixXd train(12, 3);
    Eigen::VectorXd labels(12);
    for (Eigen::Index i = 0; i < 12; ++i) {
        for (Eigen::Index j = 0; j < 3; ++j) train(i, j) = rng.uniform(-1.0, 1.0);
        labels(i) = static_cast<double>(i % 3);
    }
    Eigen::MatrixXd queries(7, 3);
    for (Eigen::Index i = 0; i < 7; ++i) {
        for (Eigen::Index j = 0; j < 3; ++j) queries(i, j) = rng.uniform(-1.0, 1.0);
    }
    auto base = analysis::knn_estimate(train, labels, queries, 4, analysis::Task::Discrete);

    auto perm = rng.permutation(12);
    Eigen::MatrixXd train2(12, 3);
    Eigen::VectorXd labels2(12);
    for (Eigen::Index i = 0; i < 12; ++i) {
        train2.row(i) = train.row(static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)]));
        labels2(i) = labels(static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)]));
    }
    auto shuffled = analysis::knn_estimate(train2, labels2, queries, 4, analysis::Task::Discrete);
    CHECK(base == shuffled);
}

TEST_CASE("pca: centered 2-d features are only rotated") {
    Rng rng(71);
    Eigen::MatrixXd rows(30, 2);
    for (Eigen::Index i = 0; i < 30; ++i) {
        rows(i, 0) = rng.uniform(-2.0, 2.0);
        rows(i, 1) = 0.3 * rows(i, 0) + rng.uniform(-1.0, 1.0);
    }
    rows.rowwise() -= rows.colwise().mean().eval();
    auto res = analysis::pca_project(rows);
    REQUIRE(res.coords.cols() == 2);
    CHECK_FALSE(res.rank_deficient);
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < rows.rows(); ++j) {
            const double before = (rows.row(i) - rows.row(j)).norm();
            const double after = (res.coords.row(i) - res.coords.row(j)).norm();
            REQUIRE(std::abs(before - after) < 1e-9);
        }
    }
}

TEST_CASE("pca: duplicate rows project to identical coordinates") {
    Eigen::MatrixXd rows(4, 3);
    rows << 1.0, 2.0, 3.0, -1.0, 0.5, 2.0, 1.0, 2.0, 3.0, 0.0, 0.0, 1.0;
    auto res = analysis::pca_project(rows);
    CHECK(res.coords.row(0) == res.coords.row(2));
}

TEST_CASE("pca: collinear data is flagged rank-deficient with one component") {
    Eigen::MatrixXd rows(10, 3);
    for (Eigen::Index i = 0; i < 10; ++i) {
        const double t = static_cast<double>(i);
        rows.row(i) << t, 2.0 * t, -t;
    }
    auto res = analysis::pca_project(rows);
    CHECK(res.rank_deficient);
    CHECK(res.coords.cols() == 1);
}

TEST_CASE("pca: component signs follow the largest loading") {
    Eigen::MatrixXd rows(6, 2);
    rows << 1, 0, 2, 0.1, 3, -0.1, 4, 0, 5, 0.05, 6, -0.05;
    auto res = analysis::pca_project(rows);
    Eigen::Index lead = 0;
    for (Eigen::Index i = 1; i < res.components.rows(); ++i) {
        if (std::abs(res.components(i, 0)) > std::abs(res.components(lead, 0))) lead = i;
    }
    CHECK(res.components(lead, 0) > 0.0);
}

TEST_CASE("error ratio: stateless twin with a silenced memory path gives ratios of one") {
    auto data = env::generate_dataset("mountain-car", 6, 10, 77);
    wm::TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 4;
    cfg.memory = 5;
    cfg.encoder_layers = {8};
    cfg.decoder_hidden = {8};
    cfg.seed = 21;
    ThreadPool pool(1);
    auto stateful = wm::train_world_model(data, cfg, pool).model;
    // silence the memory columns of the decoder input layer
    stateful.decoder().layers()[0].w.leftCols(5).setZero();

    analysis::StatelessModel stateless(2, 1, cfg.encoder_layers, cfg.decoder_hidden,
                                       stateful.normalization());
    stateless.encoder() = stateful.encoder();
    stateless.decoder() = stateful.decoder();
    stateless.decoder().layers()[0].w =
        stateful.decoder().layers()[0].w.rightCols(8).eval();

    auto table = analysis::error_ratio_table(data, stateful, stateless,
                                             {"position", "velocity"}, 2);
    REQUIRE(table.rows.size() == 2);
    for (const auto& row : table.rows) {
        REQUIRE_FALSE(row.saturated);
        CHECK(row.ratio == 1.0);
    }
}

TEST_CASE("error ratio: saturated rows are flagged") {
    analysis::ErrorRatioTable table;
    table.rows.push_back({"a", 1.0, 0.5, 2.0, false});
    table.rows.push_back({"b", 1.0, 0.0, 0.0, true});
    CHECK(table.max_ratio_index() == 0);
    analysis::save_error_ratio_csv(table, "/tmp/hplb_ratio.csv");
    std::ifstream in("/tmp/hplb_ratio.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "feature,stateless_error,stateful_error,ratio,flag");
    std::getline(in, line);
    CHECK(line == "a,1,0.5,2,ok");
    std::getline(in, line);
    CHECK(line == "b,1,0,,saturated");
}

TEST_CASE("stateless model: training is deterministic and learns the constant map") {
    Rng rng(303);
    std::vector<env::Trajectory> data;
    for (int i = 0; i < 8; ++i) {
        env::Trajectory t;
        t.env = "constant";
        Eigen::VectorXd s(2);
        s << rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0);
        for (int k = 0; k <= 8; ++k) t.states.push_back(s);
        for (int k = 0; k < 8; ++k) {
            Eigen::VectorXd a(1);
            a << rng.uniform(-1.0, 1.0);
            t.actions.push_back(a);
        }
        data.push_back(t);
    }
    wm::TrainConfig cfg;
    cfg.epochs = 40;
    cfg.batch_size = 4;
    cfg.encoder_layers = {8};
    cfg.decoder_hidden = {8};
    cfg.seed = 4;
    ThreadPool one(1), two(2);
    auto a = analysis::train_stateless_model(data, cfg, one);
    auto b = analysis::train_stateless_model(data, cfg, two);
    std::vector<double> pa(a.param_count()), pb(b.param_count());
    a.copy_params_to(pa);
    b.copy_params_to(pb);
    CHECK(pa == pb);

    double err = 0.0;
    for (const auto& t : data) {
        err += (a.predict(t.states[0], t.actions[0]) - t.states[1]).cwiseAbs().mean();
    }
    CHECK(err / static_cast<double>(data.size()) < 1e-3);
}

TEST_CASE("estimation curve: step zero degenerates to the train-set majority class") {
    auto train_data = env::generate_dataset("mountain-car", 9, 10, 404);
    auto test_data = env::generate_dataset("mountain-car", 15, 10, 505);
    wm::TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 4;
    cfg.memory = 4;
    cfg.encoder_layers = {6};
    cfg.decoder_hidden = {6};
    cfg.seed = 1;
    ThreadPool pool(1);
    auto model = wm::train_world_model(train_data, cfg, pool).model;

    auto train_fs = analysis::build_feature_set(model, train_data,
                                                analysis::FeatureKind::BaselineMemory, nullptr,
                                                pool);
    auto test_fs = analysis::build_feature_set(model, test_data,
                                               analysis::FeatureKind::BaselineMemory, nullptr,
                                               pool);
    env::MountainCarEnv e;
    auto curve = analysis::estimation_curve(train_fs, test_fs, 5, analysis::Task::Discrete,
                                            e.hidden_spec());
    REQUIRE(curve.steps.size() == 11);

    // expected: constant prediction of the train majority class; exact vote
    // ties resolve to the earliest train point carrying a top-voted label
    std::map<double, int> counts;
    for (Eigen::Index i = 0; i < train_fs.labels.size(); ++i) counts[train_fs.labels(i)]++;
    int best = 0;
    for (auto& [label, c] : counts) best = std::max(best, c);
    double majority = 0.0;
    for (Eigen::Index i = 0; i < train_fs.labels.size(); ++i) {
        if (counts[train_fs.labels(i)] == best) {
            majority = train_fs.labels(i);
            break;
        }
    }
    double expected = 0.0;
    for (Eigen::Index i = 0; i < test_fs.labels.size(); ++i) {
        if (test_fs.labels(i) == majority) expected += 1.0;
    }
    expected /= static_cast<double>(test_fs.labels.size());
    CHECK(curve.values[0] == expected);
}

TEST_CASE("sweep: one hidden value reduces to a single rollout") {
    auto data = env::generate_dataset("mountain-car", 6, 10, 99);
    wm::TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 4;
    cfg.memory = 4;
    cfg.encoder_layers = {6};
    cfg.decoder_hidden = {6};
    cfg.seed = 2;
    ThreadPool pool(1);
    auto model = wm::train_world_model(data, cfg, pool).model;
    env::MountainCarEnv e;
    const auto actions = analysis::default_sweep_actions(e, 5, 77);
    Eigen::VectorXd start(2);
    start << -0.5, 0.0;

    auto sweep = analysis::imagine_sweep(model, e, start, actions, {1.0}, 8, 31);
    REQUIRE(sweep.rollouts.size() == 1);

    const auto cond = env::generate_trajectory_with_hidden(e, 8, 31, 1.0);
    auto direct = wm::imagine_rollout(model, start, actions, cond, 8);
    REQUIRE(sweep.rollouts[0].states.size() == direct.states.size());
    for (std::size_t i = 0; i < direct.states.size(); ++i) {
        CHECK(sweep.rollouts[0].states[i] == direct.states[i]);
    }
}

TEST_CASE("sweep: csv export is aligned long format") {
    analysis::SweepResult sweep;
    sweep.hidden_values = {0.5, 1.0};
    wm::RolloutResult r;
    r.states = {vec({1.0, 2.0}), vec({3.0, 4.0})};
    sweep.rollouts = {r, r};
    analysis::save_sweep_csv(sweep, {"a", "b"}, "/tmp/hplb_sweep.csv");
    std::ifstream in("/tmp/hplb_sweep.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "hidden,step,diverged,a,b");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 4);
}

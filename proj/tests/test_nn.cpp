#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "hplb/core/json_io.hpp"
#include "hplb/core/rng.hpp"
#include "hplb/nn/dense.hpp"
#include "hplb/nn/gru.hpp"
#include "hplb/nn/loss.hpp"
#include "hplb/nn/optim.hpp"
#include "hplb/nn/serialize.hpp"
#include "support/finite_diff.hpp"

using namespace hplb;
using Catch::Approx;

namespace {

std::vector<double> params_of(const nn::DenseNet& net) {
    std::vector<double> p(net.param_count());
    net.copy_params_to(p);
    return p;
}

std::vector<double> params_of(const nn::GruCell& cell) {
    std::vector<double> p(cell.param_count());
    cell.copy_params_to(p);
    return p;
}

Eigen::VectorXd random_vec(Rng& rng, Eigen::Index n, double scale = 1.0) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.uniform(-scale, scale);
    return v;
}

}  // namespace

TEST_CASE("dense: zero weights yield the bias") {
    nn::DenseNet net({3, 2}, {nn::Activation::Identity});
    net.layers()[0].b << 0.5, -1.25;
    nn::DenseNet::Cache cache;
    Eigen::VectorXd in(3);
    in << 7.0, -3.0, 11.0;
    const auto& out = net.forward(in, cache);
    CHECK(out(0) == 0.5);
    CHECK(out(1) == -1.25);
}

TEST_CASE("dense: identity layer maps input to itself") {
    nn::DenseNet net({3, 3}, {nn::Activation::Identity});
    net.layers()[0].w = Eigen::MatrixXd::Identity(3, 3);
    nn::DenseNet::Cache cache;
    Eigen::VectorXd in(3);
    in << 0.25, -4.0, 1.5;
    const auto& out = net.forward(in, cache);
    CHECK(out.isApprox(in, 0.0));
}

TEST_CASE("dense: input dimension mismatch is a structural error") {
    nn::DenseNet net = nn::DenseNet::mlp(3, {4}, 2);
    nn::DenseNet::Cache cache;
    CHECK_THROWS_AS(net.forward(Eigen::VectorXd::Zero(5), cache), std::invalid_argument);
}

TEST_CASE("dense: forward is pure") {
    Rng rng(7);
    nn::DenseNet net = nn::DenseNet::mlp(4, {6}, 3);
    net.init_uniform(rng);
    Eigen::VectorXd in = random_vec(rng, 4);
    nn::DenseNet::Cache c1, c2;
    Eigen::VectorXd out1 = net.forward(in, c1);
    Eigen::VectorXd out2 = net.forward(in, c2);
    CHECK(out1.isApprox(out2, 0.0));
}

TEST_CASE("dense: input gradient of a random 2-3-2 net matches finite differences") {
    Rng rng(42);
    nn::DenseNet net = nn::DenseNet::mlp(2, {3}, 2);
    net.init_uniform(rng);
    Eigen::VectorXd in = random_vec(rng, 2);
    Eigen::VectorXd probe = random_vec(rng, 2);  // scalarizes the output

    nn::DenseNet::Cache cache;
    net.forward(in, cache);
    nn::DenseNet::Grad grad;
    Eigen::VectorXd d_in = net.backward(cache, probe, grad);

    std::vector<double> theta(in.data(), in.data() + in.size());
    auto loss = [&](const std::vector<double>& t) {
        Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(t.data(), 2);
        nn::DenseNet::Cache c;
        return probe.dot(net.forward(x, c));
    };
    std::vector<double> analytic(d_in.data(), d_in.data() + d_in.size());
    auto report = testsupport::fd_check(theta, loss, analytic, 1e-5, 1e-3);
    CHECK(report.max_rel_err < 1e-6);
}

TEST_CASE("dense: parameter gradients match finite differences on random nets") {
    // dimensions <= 8 over repeated random configurations
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed * 977 + 13);
        const auto in_dim = static_cast<Eigen::Index>(2 + rng.uniform_int(6));
        const auto hid = static_cast<std::size_t>(2 + rng.uniform_int(6));
        const auto out_dim = static_cast<Eigen::Index>(1 + rng.uniform_int(7));
        nn::DenseNet net = nn::DenseNet::mlp(static_cast<std::size_t>(in_dim), {hid},
                                             static_cast<std::size_t>(out_dim));
        net.init_uniform(rng);
        Eigen::VectorXd in = random_vec(rng, in_dim);
        Eigen::VectorXd probe = random_vec(rng, out_dim);

        nn::DenseNet::Cache cache;
        net.forward(in, cache);
        nn::DenseNet::Grad grad;
        net.backward(cache, probe, grad);
        std::vector<double> analytic(net.param_count());
        nn::DenseNet::copy_grad_to(grad, analytic);

        auto loss = [&](const std::vector<double>& t) {
            nn::DenseNet copy = net;
            copy.copy_params_from(t);
            nn::DenseNet::Cache c;
            return probe.dot(copy.forward(in, c));
        };
        auto report = testsupport::fd_check(params_of(net), loss, analytic);
        INFO("seed " << seed << " worst index " << report.worst_index);
        CHECK(report.max_rel_err < 1e-4);
    }
}

TEST_CASE("gru: zero parameters halve the memory") {
    nn::GruCell cell(3, 4);
    nn::GruCell::Cache cache;
    Eigen::VectorXd in(3);
    in << 1.0, -2.0, 0.5;
    Eigen::VectorXd h(4);
    h << 4.0, -2.0, 8.0, 0.0;
    const auto& next = cell.step(in, h, cache);
    CHECK(next.isApprox(0.5 * h, 0.0));

    const auto& from_zero = cell.step(in, Eigen::VectorXd::Zero(4), cache);
    CHECK(from_zero.isZero(0.0));
}

TEST_CASE("gru: dimension mismatch is a structural error") {
    nn::GruCell cell(3, 4);
    nn::GruCell::Cache cache;
    CHECK_THROWS_AS(cell.step(Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(4), cache),
                    std::invalid_argument);
    CHECK_THROWS_AS(cell.step(Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(5), cache),
                    std::invalid_argument);
}

TEST_CASE("gru: parameter gradients match finite differences") {
    Rng rng(2024);
    nn::GruCell cell(3, 4);
    cell.init_uniform(rng);
    Eigen::VectorXd in = random_vec(rng, 3);
    Eigen::VectorXd h = random_vec(rng, 4);
    Eigen::VectorXd probe = random_vec(rng, 4);

    nn::GruCell::Cache cache;
    cell.step(in, h, cache);
    nn::GruCell::Grad grad;
    Eigen::VectorXd d_in = Eigen::VectorXd::Zero(3);
    Eigen::VectorXd d_h = Eigen::VectorXd::Zero(4);
    cell.backward(cache, probe, grad, d_in, d_h);
    std::vector<double> analytic(cell.param_count());
    nn::GruCell::copy_grad_to(grad, analytic);

    auto loss = [&](const std::vector<double>& t) {
        nn::GruCell copy = cell;
        copy.copy_params_from(t);
        nn::GruCell::Cache c;
        return probe.dot(copy.step(in, h, c));
    };
    auto report = testsupport::fd_check(params_of(cell), loss, analytic, 1e-5, 1e-4);
    CHECK(report.max_rel_err < 1e-5);
}

TEST_CASE("gru: input and memory gradients match finite differences on random cells") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed * 31337 + 5);
        const auto in_dim = static_cast<Eigen::Index>(1 + rng.uniform_int(7));
        const auto hid_dim = static_cast<Eigen::Index>(1 + rng.uniform_int(7));
        nn::GruCell cell(static_cast<std::size_t>(in_dim), static_cast<std::size_t>(hid_dim));
        cell.init_uniform(rng);
        Eigen::VectorXd in = random_vec(rng, in_dim);
        Eigen::VectorXd h = random_vec(rng, hid_dim);
        Eigen::VectorXd probe = random_vec(rng, hid_dim);

        nn::GruCell::Cache cache;
        cell.step(in, h, cache);
        nn::GruCell::Grad grad;
        Eigen::VectorXd d_in = Eigen::VectorXd::Zero(in_dim);
        Eigen::VectorXd d_h = Eigen::VectorXd::Zero(hid_dim);
        cell.backward(cache, probe, grad, d_in, d_h);

        std::vector<double> theta(in.size() + h.size());
        std::copy(in.data(), in.data() + in.size(), theta.data());
        std::copy(h.data(), h.data() + h.size(), theta.data() + in.size());
        std::vector<double> analytic(theta.size());
        std::copy(d_in.data(), d_in.data() + d_in.size(), analytic.data());
        std::copy(d_h.data(), d_h.data() + d_h.size(), analytic.data() + d_in.size());

        auto loss = [&](const std::vector<double>& t) {
            Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(t.data(), in_dim);
            Eigen::VectorXd hh = Eigen::Map<const Eigen::VectorXd>(t.data() + in_dim, hid_dim);
            nn::GruCell::Cache c;
            return probe.dot(cell.step(x, hh, c));
        };
        auto report = testsupport::fd_check(theta, loss, analytic);
        INFO("seed " << seed);
        CHECK(report.max_rel_err < 1e-4);
    }
}

TEST_CASE("l1 loss: identical inputs give zero loss and zero gradient") {
    Eigen::VectorXd a(2);
    a << 1.0, -1.0;
    auto res = nn::l1_loss(a, a);
    CHECK(res.loss == 0.0);
    CHECK(res.grad.isZero(0.0));
}

TEST_CASE("l1 loss: direct evaluation") {
    Eigen::VectorXd p(2), t(2);
    p << 2.0, 0.0;
    t << 0.0, 0.0;
    auto res = nn::l1_loss(p, t);
    CHECK(res.loss == 1.0);
    CHECK(res.grad(0) == 0.5);
    CHECK(res.grad(1) == 0.0);
}

TEST_CASE("l1 loss: length mismatch is a structural error") {
    CHECK_THROWS_AS(nn::l1_loss(Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(3)),
                    std::invalid_argument);
}

TEST_CASE("l1 loss: gradient matches finite differences away from ties") {
    Rng rng(99);
    const Eigen::Index n = 5;
    Eigen::VectorXd target = random_vec(rng, n);
    Eigen::VectorXd pred = target;
    for (Eigen::Index i = 0; i < n; ++i) {
        // keep every component at least 10*step away from its tie
        double off = rng.uniform(0.05, 1.0) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
        pred(i) += off;
    }
    auto res = nn::l1_loss(pred, target);
    std::vector<double> theta(pred.data(), pred.data() + n);
    std::vector<double> analytic(res.grad.data(), res.grad.data() + n);
    auto loss = [&](const std::vector<double>& t) {
        Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(t.data(), n);
        return nn::l1_loss(p, target).loss;
    };
    auto report = testsupport::fd_check(theta, loss, analytic, 1e-5, 1e-2);
    CHECK(report.max_rel_err < 1e-8);
}

TEST_CASE("adam: first step moves by -lr * sign(gradient)") {
    nn::ParamVector params(2);
    params.values << 3.0, -2.0;
    params.grad << 0.37, -1.9;
    nn::AdamConfig cfg;
    cfg.lr = 0.05;
    nn::adam_step(params, cfg);
    CHECK(params.values(0) == Approx(3.0 - 0.05).epsilon(1e-6));
    CHECK(params.values(1) == Approx(-2.0 + 0.05).epsilon(1e-6));
    CHECK(params.step == 1);
}

TEST_CASE("adam: zero gradient at step one leaves parameters unchanged") {
    nn::ParamVector params(3);
    params.values << 1.0, 2.0, 3.0;
    params.grad.setZero();
    nn::adam_step(params, nn::AdamConfig{});
    CHECK(params.values(0) == 1.0);
    CHECK(params.values(1) == 2.0);
    CHECK(params.values(2) == 3.0);
}

TEST_CASE("adam: two steps on a scalar quadratic match the precomputed trace") {
    // f(x) = x^2/2 from x0 = 1 with lr 0.1; expected values computed
    // independently from the update recurrence
    nn::ParamVector params(1);
    params.values(0) = 1.0;
    nn::AdamConfig cfg;
    cfg.lr = 0.1;

    params.grad(0) = params.values(0);
    nn::adam_step(params, cfg);
    CHECK(params.values(0) == Approx(0.900000001).margin(1e-12));

    params.grad(0) = params.values(0);
    nn::adam_step(params, cfg);
    CHECK(params.values(0) == Approx(0.8004122297123382).margin(1e-12));
}

TEST_CASE("adam: non-finite gradient aborts") {
    nn::ParamVector params(1);
    params.grad(0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(nn::adam_step(params, nn::AdamConfig{}), std::runtime_error);
}

TEST_CASE("serialization: dense and gru round-trip bit-exactly through decimal json") {
    Rng rng(31);
    nn::DenseNet net = nn::DenseNet::mlp(3, {5, 4}, 2);
    net.init_uniform(rng);
    const std::string text = hplb::dump_json_g17(nn::dense_to_json(net));
    nn::DenseNet back = nn::dense_from_json(nlohmann::json::parse(text));
    CHECK(params_of(net) == params_of(back));

    nn::GruCell cell(3, 6);
    cell.init_uniform(rng);
    const std::string gtext = hplb::dump_json_g17(nn::gru_to_json(cell));
    nn::GruCell gback = nn::gru_from_json(nlohmann::json::parse(gtext));
    CHECK(params_of(cell) == params_of(gback));
}

/*
 * Copyright 2026 The crowdcl Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "crowdcl/net.hpp"
#include "grad_check.hpp"
#include "test_util.hpp"

namespace {

using crowdcl::DomainError;
using crowdcl::Gradients;
using crowdcl::HeadKind;
using crowdcl::LossKind;
using crowdcl::NetworkConfig;
using crowdcl::NetworkState;
using crowdcl::NumericalError;
using crowdcl::ParseError;
using crowdcl::Targets;
using testutil::TempDir;

NetworkConfig regression_config(int input_dim, std::vector<int> hidden, int output_dim,
                                std::uint64_t seed) {
    NetworkConfig cfg;
    cfg.input_dim = input_dim;
    cfg.hidden_sizes = std::move(hidden);
    cfg.output_dim = output_dim;
    cfg.head = HeadKind::identity;
    cfg.loss = LossKind::mse;
    cfg.seed = seed;
    return cfg;
}

NetworkConfig classification_config(int input_dim, std::vector<int> hidden, int classes,
                                    std::uint64_t seed) {
    NetworkConfig cfg;
    cfg.input_dim = input_dim;
    cfg.hidden_sizes = std::move(hidden);
    cfg.output_dim = classes;
    cfg.head = HeadKind::softmax;
    cfg.loss = LossKind::cross_entropy;
    cfg.seed = seed;
    return cfg;
}

void zero_parameters(NetworkState& st) {
    for (auto& w : st.w) w.setZero();
    for (auto& b : st.b) b.setZero();
}

void expect_states_identical(const NetworkState& a, const NetworkState& b) {
    ASSERT_EQ(a.num_layers(), b.num_layers());
    EXPECT_EQ(a.step, b.step);
    for (std::size_t l = 0; l < a.num_layers(); ++l) {
        EXPECT_TRUE(a.w[l] == b.w[l]) << "weights differ in layer " << l;
        EXPECT_TRUE(a.b[l] == b.b[l]) << "biases differ in layer " << l;
        EXPECT_TRUE(a.m_w[l] == b.m_w[l]) << "first moments differ in layer " << l;
        EXPECT_TRUE(a.v_w[l] == b.v_w[l]) << "second moments differ in layer " << l;
        EXPECT_TRUE(a.m_b[l] == b.m_b[l]) << "first bias moments differ in layer " << l;
        EXPECT_TRUE(a.v_b[l] == b.v_b[l]) << "second bias moments differ in layer " << l;
    }
}

TEST(NetworkInit, ParameterCountMatchesHandCount) {
    // 3 -> 4 -> 2: (3*4 + 4) + (4*2 + 2) = 26 parameters.
    const auto st = crowdcl::init_network(classification_config(3, {4}, 2, 0));
    EXPECT_EQ(st.parameter_count(), 26u);
    EXPECT_EQ(st.num_layers(), 2u);
    EXPECT_EQ(st.w[0].rows(), 3);
    EXPECT_EQ(st.w[0].cols(), 4);
    EXPECT_EQ(st.w[1].rows(), 4);
    EXPECT_EQ(st.w[1].cols(), 2);
}

TEST(NetworkInit, SameSeedIsBitIdenticalAndBiasesStartAtZero) {
    const auto cfg = regression_config(5, {7, 3}, 2, 42);
    const auto a = crowdcl::init_network(cfg);
    const auto b = crowdcl::init_network(cfg);
    expect_states_identical(a, b);
    for (const auto& bias : a.b) EXPECT_EQ(bias.cwiseAbs().maxCoeff(), 0.0);
    for (const auto& m : a.m_w) EXPECT_EQ(m.cwiseAbs().maxCoeff(), 0.0);
    for (const auto& v : a.v_w) EXPECT_EQ(v.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(a.step, 0);

    auto other = cfg;
    other.seed = 43;
    const auto c = crowdcl::init_network(other);
    EXPECT_FALSE(a.w[0] == c.w[0]);
}

TEST(NetworkInit, WeightsStayInsideGlorotBounds) {
    const auto st = crowdcl::init_network(regression_config(6, {9}, 4, 7));
    for (const auto& w : st.w) {
        const double limit =
            std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols())) + 1e-12;
        EXPECT_LE(w.cwiseAbs().maxCoeff(), limit);
        // A constant draw would mean the generator is not being consumed.
        EXPECT_GT(w.maxCoeff(), w.minCoeff());
    }
}

TEST(NetworkInit, RejectsInvalidConfigurations) {
    EXPECT_THROW(crowdcl::init_network(regression_config(0, {4}, 1, 0)), DomainError);
    EXPECT_THROW(crowdcl::init_network(regression_config(3, {}, 1, 0)), DomainError);
    EXPECT_THROW(crowdcl::init_network(regression_config(3, {0}, 1, 0)), DomainError);
    EXPECT_THROW(crowdcl::init_network(regression_config(3, {4}, 0, 0)), DomainError);

    NetworkConfig mismatched = regression_config(3, {4}, 2, 0);
    mismatched.loss = LossKind::cross_entropy;
    EXPECT_THROW(crowdcl::init_network(mismatched), DomainError);
    mismatched.head = HeadKind::softmax;
    mismatched.loss = LossKind::mse;
    EXPECT_THROW(crowdcl::init_network(mismatched), DomainError);
}

TEST(NetworkForward, ZeroWeightsGiveUniformSoftmaxAndZeroIdentity) {
    auto cls = crowdcl::init_network(classification_config(4, {5}, 3, 1));
    zero_parameters(cls);
    Eigen::MatrixXd batch = Eigen::MatrixXd::Random(6, 4);
    const auto probs = crowdcl::forward(cls, batch);
    ASSERT_EQ(probs.rows(), 6);
    ASSERT_EQ(probs.cols(), 3);
    for (Eigen::Index r = 0; r < probs.rows(); ++r)
        for (Eigen::Index c = 0; c < probs.cols(); ++c)
            EXPECT_NEAR(probs(r, c), 1.0 / 3.0, 1e-15);

    auto reg = crowdcl::init_network(regression_config(4, {5}, 2, 1));
    zero_parameters(reg);
    const auto out = crowdcl::forward(reg, batch);
    EXPECT_EQ(out.cwiseAbs().maxCoeff(), 0.0);
}

TEST(NetworkForward, SoftmaxRowsSumToOne) {
    const auto st = crowdcl::init_network(classification_config(8, {16, 16}, 5, 99));
    std::mt19937_64 rng(3);
    std::normal_distribution<double> gauss(0.0, 2.0);
    Eigen::MatrixXd batch(10, 8);
    for (Eigen::Index r = 0; r < batch.rows(); ++r)
        for (Eigen::Index c = 0; c < batch.cols(); ++c) batch(r, c) = gauss(rng);
    const auto probs = crowdcl::forward(st, batch);
    for (Eigen::Index r = 0; r < probs.rows(); ++r) {
        EXPECT_NEAR(probs.row(r).sum(), 1.0, 1e-9);
        EXPECT_GE(probs.row(r).minCoeff(), 0.0);
    }
}

TEST(NetworkForward, BatchRowsMatchSingleRowPasses) {
    const auto st = crowdcl::init_network(regression_config(5, {11, 7}, 3, 21));
    Eigen::MatrixXd batch = Eigen::MatrixXd::Random(2, 5);
    const auto both = crowdcl::forward(st, batch);
    const auto first = crowdcl::forward(st, batch.topRows(1));
    const auto second = crowdcl::forward(st, batch.bottomRows(1));
    EXPECT_LT((both.row(0) - first.row(0)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((both.row(1) - second.row(0)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(NetworkForward, RejectsBadBatches) {
    const auto st = crowdcl::init_network(regression_config(4, {3}, 1, 0));
    EXPECT_THROW(crowdcl::forward(st, Eigen::MatrixXd::Zero(2, 5)), DomainError);
    Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(2, 4);
    bad(1, 2) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(crowdcl::forward(st, bad), NumericalError);
}

TEST(NetworkLoss, PerfectRegressionPredictionHasZeroLossAndZeroGradients) {
    auto st = crowdcl::init_network(regression_config(3, {4}, 1, 5));
    zero_parameters(st);
    Eigen::MatrixXd batch = Eigen::MatrixXd::Random(4, 3);
    const auto targets = Targets::regression(Eigen::VectorXd::Zero(4));
    Gradients grads;
    const double loss = crowdcl::loss_and_gradient(st, batch, targets, grads);
    EXPECT_EQ(loss, 0.0);
    for (const auto& g : grads.w) EXPECT_EQ(g.cwiseAbs().maxCoeff(), 0.0);
    for (const auto& g : grads.b) EXPECT_EQ(g.cwiseAbs().maxCoeff(), 0.0);
}

TEST(NetworkLoss, UniformBinaryPredictionCostsLogTwo) {
    auto st = crowdcl::init_network(classification_config(3, {4}, 2, 5));
    zero_parameters(st);
    Eigen::MatrixXd batch = Eigen::MatrixXd::Random(1, 3);
    Gradients grads;
    const double loss =
        crowdcl::loss_and_gradient(st, batch, Targets::classification({0}), grads);
    EXPECT_NEAR(loss, std::log(2.0), 1e-12);
}

TEST(NetworkLoss, MseMatchesHandComputation) {
    auto st = crowdcl::init_network(regression_config(2, {2}, 1, 5));
    zero_parameters(st);
    Eigen::MatrixXd batch = Eigen::MatrixXd::Zero(2, 2);
    Eigen::VectorXd y(2);
    y << 1.0, -3.0;
    Gradients grads;
    // Predictions are all zero, so the loss is (1 + 9) / 2.
    const double loss = crowdcl::loss_and_gradient(st, batch, Targets::regression(y), grads);
    EXPECT_NEAR(loss, 5.0, 1e-15);
}

TEST(NetworkLoss, RejectsMismatchedTargets) {
    auto st = crowdcl::init_network(classification_config(3, {4}, 2, 5));
    Eigen::MatrixXd batch = Eigen::MatrixXd::Random(2, 3);
    Gradients grads;
    EXPECT_THROW(crowdcl::loss_and_gradient(st, batch, Targets::classification({0}), grads),
                 DomainError);
    EXPECT_THROW(crowdcl::loss_and_gradient(st, batch, Targets::classification({0, 2}), grads),
                 DomainError);
    EXPECT_THROW(crowdcl::loss_and_gradient(st, batch, Targets::classification({0, -1}), grads),
                 DomainError);

    auto reg = crowdcl::init_network(regression_config(3, {4}, 1, 5));
    EXPECT_THROW(
        crowdcl::loss_and_gradient(reg, batch, Targets::regression(Eigen::VectorXd::Zero(3)), grads),
        DomainError);
}

TEST(NetworkGradients, BackpropMatchesFiniteDifferencesForBothHeads) {
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> gauss(0.0, 1.0);

    auto reg = crowdcl::init_network(regression_config(4, {6, 5}, 2, 11));
    Eigen::MatrixXd batch(3, 4);
    for (Eigen::Index r = 0; r < batch.rows(); ++r)
        for (Eigen::Index c = 0; c < batch.cols(); ++c) batch(r, c) = gauss(rng);
    Eigen::MatrixXd y(3, 2);
    for (Eigen::Index r = 0; r < y.rows(); ++r)
        for (Eigen::Index c = 0; c < y.cols(); ++c) y(r, c) = gauss(rng);
    Targets reg_targets;
    reg_targets.values = y;
    EXPECT_LE(testutil::max_relative_gradient_error(reg, batch, reg_targets), 1e-4);

    auto cls = crowdcl::init_network(classification_config(4, {6, 5}, 3, 12));
    EXPECT_LE(testutil::max_relative_gradient_error(cls, batch,
                                                    Targets::classification({0, 2, 1})),
              1e-4);
}

TEST(Adam, ZeroGradientsLeaveParametersUntouched) {
    auto st = crowdcl::init_network(regression_config(3, {4}, 1, 9));
    const auto before = st;
    Gradients grads;
    grads.w.resize(st.num_layers());
    grads.b.resize(st.num_layers());
    for (std::size_t l = 0; l < st.num_layers(); ++l) {
        grads.w[l] = Eigen::MatrixXd::Zero(st.w[l].rows(), st.w[l].cols());
        grads.b[l] = Eigen::VectorXd::Zero(st.b[l].size());
    }
    crowdcl::adam_step(st, grads, 0.01);
    EXPECT_EQ(st.step, 1);
    for (std::size_t l = 0; l < st.num_layers(); ++l) {
        EXPECT_TRUE(st.w[l] == before.w[l]);
        EXPECT_TRUE(st.b[l] == before.b[l]);
    }
}

TEST(Adam, FirstStepMovesByLearningRateTimesSign) {
    auto st = crowdcl::init_network(regression_config(2, {2}, 1, 9));
    const auto before = st;
    Gradients grads;
    grads.w.resize(st.num_layers());
    grads.b.resize(st.num_layers());
    for (std::size_t l = 0; l < st.num_layers(); ++l) {
        grads.w[l] = Eigen::MatrixXd::Constant(st.w[l].rows(), st.w[l].cols(), 0.3);
        grads.b[l] = Eigen::VectorXd::Constant(st.b[l].size(), -0.7);
    }
    const double lr = 0.05;
    crowdcl::adam_step(st, grads, lr);
    // With bias correction the first update is lr * g / (|g| + eps) for every entry.
    for (std::size_t l = 0; l < st.num_layers(); ++l) {
        EXPECT_NEAR((before.w[l] - st.w[l]).maxCoeff(), lr, lr * 1e-6);
        EXPECT_NEAR((before.w[l] - st.w[l]).minCoeff(), lr, lr * 1e-6);
        EXPECT_NEAR((st.b[l] - before.b[l]).maxCoeff(), lr, lr * 1e-6);
    }
}

TEST(Adam, RepeatedIdenticalCallsAreDeterministic) {
    auto a = crowdcl::init_network(regression_config(3, {5}, 2, 4));
    auto b = a;
    Gradients grads;
    grads.w.resize(a.num_layers());
    grads.b.resize(a.num_layers());
    std::mt19937_64 rng(8);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t l = 0; l < a.num_layers(); ++l) {
        grads.w[l].resize(a.w[l].rows(), a.w[l].cols());
        for (Eigen::Index r = 0; r < grads.w[l].rows(); ++r)
            for (Eigen::Index c = 0; c < grads.w[l].cols(); ++c) grads.w[l](r, c) = gauss(rng);
        grads.b[l] = Eigen::VectorXd::Zero(a.b[l].size());
    }
    for (int i = 0; i < 5; ++i) {
        crowdcl::adam_step(a, grads, 0.002);
        crowdcl::adam_step(b, grads, 0.002);
    }
    expect_states_identical(a, b);
    EXPECT_EQ(a.step, 5);
}

TEST(Adam, RejectsInvalidStepInputs) {
    auto st = crowdcl::init_network(regression_config(2, {2}, 1, 0));
    Gradients grads;
    grads.w.resize(st.num_layers());
    grads.b.resize(st.num_layers());
    for (std::size_t l = 0; l < st.num_layers(); ++l) {
        grads.w[l] = Eigen::MatrixXd::Zero(st.w[l].rows(), st.w[l].cols());
        grads.b[l] = Eigen::VectorXd::Zero(st.b[l].size());
    }
    EXPECT_THROW(crowdcl::adam_step(st, grads, 0.0), DomainError);
    EXPECT_THROW(crowdcl::adam_step(st, grads, -0.1), DomainError);
    grads.w[0](0, 0) = std::numeric_limits<double>::infinity();
    EXPECT_THROW(crowdcl::adam_step(st, grads, 0.01), NumericalError);
}

TEST(Training, ZeroEpochsLeaveStateUntouched) {
    auto st = crowdcl::init_network(regression_config(3, {4}, 1, 2));
    const auto before = st;
    Eigen::MatrixXd features = Eigen::MatrixXd::Random(10, 3);
    const auto trace =
        crowdcl::train_epochs(st, features, Targets::regression(Eigen::VectorXd::Zero(10)), 7, 0,
                              0.001);
    EXPECT_TRUE(trace.empty());
    expect_states_identical(st, before);
}

TEST(Training, SameSeedGivesIdenticalTraces) {
    const auto cfg = regression_config(4, {8}, 1, 33);
    Eigen::MatrixXd features = Eigen::MatrixXd::Random(50, 4);
    Eigen::VectorXd y = features * Eigen::Vector4d(1.0, -2.0, 0.5, 3.0);

    auto a = crowdcl::init_network(cfg);
    auto b = crowdcl::init_network(cfg);
    const auto ta = crowdcl::train_epochs(a, features, Targets::regression(y), 123, 5, 0.001, 16);
    const auto tb = crowdcl::train_epochs(b, features, Targets::regression(y), 123, 5, 0.001, 16);
    ASSERT_EQ(ta.size(), 5u);
    EXPECT_EQ(ta, tb);
    expect_states_identical(a, b);

    auto c = crowdcl::init_network(cfg);
    const auto tc = crowdcl::train_epochs(c, features, Targets::regression(y), 124, 5, 0.001, 16);
    EXPECT_NE(ta, tc);
}

TEST(Training, LearnsNoiselessLinearMap) {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd features(200, 4);
    for (Eigen::Index r = 0; r < features.rows(); ++r)
        for (Eigen::Index c = 0; c < features.cols(); ++c) features(r, c) = gauss(rng);
    const Eigen::VectorXd y = features * Eigen::Vector4d(0.8, -1.2, 0.4, 2.0);

    auto st = crowdcl::init_network(regression_config(4, {16}, 1, 71));
    const auto trace = crowdcl::train_epochs(st, features, Targets::regression(y), 5, 200, 0.01);
    ASSERT_EQ(trace.size(), 200u);
    EXPECT_LT(trace.back(), 1e-2);
    EXPECT_LT(trace.back(), trace.front());
}

TEST(Training, BatchLargerThanPoolIsOneFullBatch) {
    auto st = crowdcl::init_network(regression_config(2, {3}, 1, 1));
    Eigen::MatrixXd features = Eigen::MatrixXd::Random(5, 2);
    const auto trace = crowdcl::train_epochs(
        st, features, Targets::regression(Eigen::VectorXd::Zero(5)), 3, 2, 0.001, 100);
    EXPECT_EQ(trace.size(), 2u);
}

TEST(Training, RejectsInvalidArguments) {
    auto st = crowdcl::init_network(regression_config(2, {3}, 1, 1));
    Eigen::MatrixXd features = Eigen::MatrixXd::Random(5, 2);
    const auto targets = Targets::regression(Eigen::VectorXd::Zero(5));
    EXPECT_THROW(crowdcl::train_epochs(st, Eigen::MatrixXd(0, 2),
                                       Targets::regression(Eigen::VectorXd()), 1, 1, 0.001),
                 DomainError);
    EXPECT_THROW(crowdcl::train_epochs(st, features, Targets::regression(Eigen::VectorXd::Zero(4)),
                                       1, 1, 0.001),
                 DomainError);
    EXPECT_THROW(crowdcl::train_epochs(st, features, targets, 1, -1, 0.001), DomainError);
    EXPECT_THROW(crowdcl::train_epochs(st, features, targets, 1, 1, 0.001, 0), DomainError);
    EXPECT_THROW(crowdcl::train_epochs(st, features, targets, 1, 1, 0.0), DomainError);
}

TEST(Checkpoint, RoundTripIsBitExactIncludingMoments) {
    TempDir dir("crowdcl_net");
    auto st = crowdcl::init_network(classification_config(6, {9, 4}, 3, 55));
    Eigen::MatrixXd features = Eigen::MatrixXd::Random(30, 6);
    std::vector<int> classes;
    for (int i = 0; i < 30; ++i) classes.push_back(i % 3);
    crowdcl::train_epochs(st, features, Targets::classification(classes), 9, 3, 0.001, 8);
    ASSERT_GT(st.step, 0);

    const auto path = dir.path("model.nnw");
    crowdcl::save_network(st, path);
    const auto loaded = crowdcl::load_network(path);

    EXPECT_EQ(loaded.config.input_dim, st.config.input_dim);
    EXPECT_EQ(loaded.config.hidden_sizes, st.config.hidden_sizes);
    EXPECT_EQ(loaded.config.output_dim, st.config.output_dim);
    EXPECT_EQ(loaded.config.head, st.config.head);
    EXPECT_EQ(loaded.config.loss, st.config.loss);
    EXPECT_EQ(loaded.config.seed, st.config.seed);
    expect_states_identical(loaded, st);

    // A reloaded state continues training exactly like the original.
    auto resumed = loaded;
    auto original = st;
    const auto ta =
        crowdcl::train_epochs(original, features, Targets::classification(classes), 10, 2, 0.001, 8);
    const auto tb =
        crowdcl::train_epochs(resumed, features, Targets::classification(classes), 10, 2, 0.001, 8);
    EXPECT_EQ(ta, tb);
    expect_states_identical(original, resumed);
}

TEST(Checkpoint, RejectsCorruptFiles) {
    TempDir dir("crowdcl_net");
    const auto garbage = dir.path("garbage.nnw");
    {
        std::ofstream os(garbage, std::ios::binary);
        os << "not a checkpoint";
    }
    EXPECT_THROW(crowdcl::load_network(garbage), ParseError);

    auto st = crowdcl::init_network(regression_config(3, {4}, 1, 8));
    const auto full = dir.path("full.nnw");
    crowdcl::save_network(st, full);
    std::ifstream is(full, std::ios::binary);
    std::vector<char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    const auto truncated = dir.path("truncated.nnw");
    {
        std::ofstream os(truncated, std::ios::binary);
        os.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
    }
    EXPECT_THROW(crowdcl::load_network(truncated), ParseError);

    EXPECT_THROW(crowdcl::load_network(dir.path("missing.nnw")), crowdcl::Error);
}

} // namespace

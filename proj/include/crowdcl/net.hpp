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

#ifndef CROWDCL_NET_HPP
#define CROWDCL_NET_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "crowdcl/error.hpp"

namespace crowdcl {

enum class HeadKind { identity, softmax };
enum class LossKind { mse, cross_entropy };

struct NetworkConfig {
    int input_dim = 0;
    std::vector<int> hidden_sizes = {1024, 1024};
    int output_dim = 1; // class count under the softmax head
    HeadKind head = HeadKind::identity;
    LossKind loss = LossKind::mse;
    std::uint64_t seed = 0;

    void validate() const {
        if (input_dim < 1) throw DomainError("input_dim must be at least 1");
        if (output_dim < 1) throw DomainError("output_dim must be at least 1");
        if (hidden_sizes.empty()) throw DomainError("hidden_sizes must be non-empty");
        for (int h : hidden_sizes)
            if (h < 1) throw DomainError("hidden layer sizes must be at least 1");
        const bool regression = head == HeadKind::identity && loss == LossKind::mse;
        const bool classification = head == HeadKind::softmax && loss == LossKind::cross_entropy;
        if (!regression && !classification)
            throw DomainError("head/loss mismatch: identity pairs with mse, softmax with cross_entropy");
    }
};

/// Layer l maps row activations through A_{l-1} * w[l] + b[l]; ReLU between
/// hidden layers, head on the last. Adam moments mirror the parameter shapes.
struct NetworkState {
    NetworkConfig config;
    std::vector<Eigen::MatrixXd> w; // fan_in x fan_out
    std::vector<Eigen::VectorXd> b;
    std::vector<Eigen::MatrixXd> m_w, v_w;
    std::vector<Eigen::VectorXd> m_b, v_b;
    std::int64_t step = 0;

    std::size_t num_layers() const { return w.size(); }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (std::size_t l = 0; l < w.size(); ++l)
            n += static_cast<std::size_t>(w[l].size()) + static_cast<std::size_t>(b[l].size());
        return n;
    }
};

/// Targets for one training pool: `values` feeds the identity head (rows
/// aligned with the feature rows), `classes` feeds the softmax head.
struct Targets {
    Eigen::MatrixXd values;
    std::vector<int> classes;

    static Targets regression(Eigen::VectorXd y) {
        Targets t;
        t.values = std::move(y);
        return t;
    }
    static Targets classification(std::vector<int> c) {
        Targets t;
        t.classes = std::move(c);
        return t;
    }

    Eigen::Index size(HeadKind head) const {
        return head == HeadKind::identity ? values.rows()
                                          : static_cast<Eigen::Index>(classes.size());
    }
};

struct Gradients {
    std::vector<Eigen::MatrixXd> w;
    std::vector<Eigen::VectorXd> b;
};

/// Glorot-uniform weights, zero biases, zero moments. Deterministic per seed.
inline NetworkState init_network(const NetworkConfig& cfg) {
    cfg.validate();
    std::vector<int> dims;
    dims.push_back(cfg.input_dim);
    dims.insert(dims.end(), cfg.hidden_sizes.begin(), cfg.hidden_sizes.end());
    dims.push_back(cfg.output_dim);

    NetworkState st;
    st.config = cfg;
    std::mt19937_64 rng(cfg.seed);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const int fan_in = dims[l];
        const int fan_out = dims[l + 1];
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        std::uniform_real_distribution<double> dist(-limit, limit);
        Eigen::MatrixXd w(fan_in, fan_out);
        for (int r = 0; r < fan_in; ++r)
            for (int c = 0; c < fan_out; ++c) w(r, c) = dist(rng);
        st.w.push_back(std::move(w));
        st.b.push_back(Eigen::VectorXd::Zero(fan_out));
        st.m_w.push_back(Eigen::MatrixXd::Zero(fan_in, fan_out));
        st.v_w.push_back(Eigen::MatrixXd::Zero(fan_in, fan_out));
        st.m_b.push_back(Eigen::VectorXd::Zero(fan_out));
        st.v_b.push_back(Eigen::VectorXd::Zero(fan_out));
    }
    return st;
}

namespace detail {

inline void softmax_rows(Eigen::MatrixXd& z) {
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        const double mx = z.row(i).maxCoeff();
        z.row(i) = (z.row(i).array() - mx).exp();
        z.row(i) /= z.row(i).sum();
    }
}

// Activations of every layer for one batch; back() holds the head output.
inline std::vector<Eigen::MatrixXd> forward_all(const NetworkState& st, const Eigen::MatrixXd& batch) {
    if (batch.cols() != st.config.input_dim)
        throw DomainError("batch width does not match input_dim");
    if (!batch.allFinite()) throw NumericalError("batch contains non-finite values");
    std::vector<Eigen::MatrixXd> acts;
    acts.reserve(st.num_layers() + 1);
    acts.push_back(batch);
    for (std::size_t l = 0; l < st.num_layers(); ++l) {
        Eigen::MatrixXd z = acts.back() * st.w[l];
        z.rowwise() += st.b[l].transpose();
        if (l + 1 < st.num_layers())
            z = z.cwiseMax(0.0);
        else if (st.config.head == HeadKind::softmax)
            softmax_rows(z);
        acts.push_back(std::move(z));
    }
    return acts;
}

} // namespace detail

inline Eigen::MatrixXd forward(const NetworkState& st, const Eigen::MatrixXd& batch) {
    return detail::forward_all(st, batch).back();
}

/// Batch-mean loss and its backpropagated gradients. MSE sums squared error
/// over output columns; cross-entropy reads the probability of the true class
/// off the softmax output.
inline double loss_and_gradient(const NetworkState& st, const Eigen::MatrixXd& batch,
                                const Targets& targets, Gradients& grads) {
    const auto acts = detail::forward_all(st, batch);
    const Eigen::MatrixXd& out = acts.back();
    const Eigen::Index bsz = batch.rows();
    if (bsz < 1) throw DomainError("empty batch");
    if (targets.size(st.config.head) != bsz)
        throw DomainError("target count does not match batch size");

    double loss = 0.0;
    Eigen::MatrixXd dz(out.rows(), out.cols());
    if (st.config.head == HeadKind::identity) {
        if (targets.values.cols() != out.cols())
            throw DomainError("target width does not match output_dim");
        const Eigen::MatrixXd resid = out - targets.values;
        loss = resid.squaredNorm() / static_cast<double>(bsz);
        dz = 2.0 * resid / static_cast<double>(bsz);
    } else {
        dz = out;
        for (Eigen::Index i = 0; i < bsz; ++i) {
            const int cls = targets.classes[static_cast<std::size_t>(i)];
            if (cls < 0 || cls >= out.cols())
                throw DomainError("class index out of range");
            loss -= std::log(std::max(out(i, cls), 1e-300));
            dz(i, cls) -= 1.0;
        }
        loss /= static_cast<double>(bsz);
        dz /= static_cast<double>(bsz);
    }

    grads.w.resize(st.num_layers());
    grads.b.resize(st.num_layers());
    for (std::size_t l = st.num_layers(); l-- > 0;) {
        grads.w[l] = acts[l].transpose() * dz;
        grads.b[l] = dz.colwise().sum().transpose();
        if (l > 0) {
            Eigen::MatrixXd da = dz * st.w[l].transpose();
            // ReLU mask from the stored post-activation values
            dz = ((acts[l].array() > 0.0).cast<double>() * da.array()).matrix();
        }
    }
    return loss;
}

/// One Adam update (beta1 0.9, beta2 0.999, eps 1e-8, bias correction).
inline void adam_step(NetworkState& st, const Gradients& grads, double lr) {
    if (lr <= 0.0) throw DomainError("learning rate must be positive");
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    st.step += 1;
    const double corr1 = 1.0 - std::pow(beta1, static_cast<double>(st.step));
    const double corr2 = 1.0 - std::pow(beta2, static_cast<double>(st.step));
    for (std::size_t l = 0; l < st.num_layers(); ++l) {
        if (!grads.w[l].allFinite() || !grads.b[l].allFinite())
            throw NumericalError("non-finite gradient");
        st.m_w[l] = beta1 * st.m_w[l] + (1.0 - beta1) * grads.w[l];
        st.v_w[l].array() = beta2 * st.v_w[l].array() + (1.0 - beta2) * grads.w[l].array().square();
        st.m_b[l] = beta1 * st.m_b[l] + (1.0 - beta1) * grads.b[l];
        st.v_b[l].array() = beta2 * st.v_b[l].array() + (1.0 - beta2) * grads.b[l].array().square();
        st.w[l].array() -= lr * (st.m_w[l].array() / corr1) /
                           ((st.v_w[l].array() / corr2).sqrt() + eps);
        st.b[l].array() -= lr * (st.m_b[l].array() / corr1) /
                           ((st.v_b[l].array() / corr2).sqrt() + eps);
        if (!st.w[l].allFinite() || !st.b[l].allFinite())
            throw NumericalError("parameters became non-finite");
    }
}

/// Mini-batch training: `epochs` full passes over the pool, item order
/// reshuffled every epoch from a generator seeded once with item_order_seed.
/// Returns the per-epoch mean training loss (weighted by batch size).
inline std::vector<double> train_epochs(NetworkState& st, const Eigen::MatrixXd& features,
                                        const Targets& targets, std::uint64_t item_order_seed,
                                        int epochs, double lr, int batch_size = 128) {
    const Eigen::Index n = features.rows();
    if (n < 1) throw DomainError("empty training pool");
    if (targets.size(st.config.head) != n)
        throw DomainError("target count does not match pool size");
    if (epochs < 0) throw DomainError("epochs must be non-negative");
    if (batch_size < 1) throw DomainError("batch_size must be at least 1");

    std::vector<double> trace;
    trace.reserve(static_cast<std::size_t>(epochs));
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::mt19937_64 rng(item_order_seed);
    Gradients grads;

    for (int epoch = 0; epoch < epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        for (Eigen::Index start = 0; start < n; start += batch_size) {
            const Eigen::Index bsz = std::min<Eigen::Index>(batch_size, n - start);
            Eigen::MatrixXd batch(bsz, features.cols());
            Targets bt;
            if (st.config.head == HeadKind::identity)
                bt.values.resize(bsz, targets.values.cols());
            else
                bt.classes.resize(static_cast<std::size_t>(bsz));
            for (Eigen::Index r = 0; r < bsz; ++r) {
                const Eigen::Index src = order[static_cast<std::size_t>(start + r)];
                batch.row(r) = features.row(src);
                if (st.config.head == HeadKind::identity)
                    bt.values.row(r) = targets.values.row(src);
                else
                    bt.classes[static_cast<std::size_t>(r)] =
                        targets.classes[static_cast<std::size_t>(src)];
            }
            const double loss = loss_and_gradient(st, batch, bt, grads);
            adam_step(st, grads, lr);
            epoch_loss += loss * static_cast<double>(bsz);
        }
        trace.push_back(epoch_loss / static_cast<double>(n));
    }
    return trace;
}

// -------------------------------------------------------------------------
// Checkpoint: magic "NNW1", little-endian; u32 head, loss, input_dim,
// output_dim, hidden count, hidden sizes; u64 seed; i64 step; then per layer
// W row-major + b; then the m moments (same order), then the v moments.
// -------------------------------------------------------------------------

namespace detail {

template <typename T>
void write_pod(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is, const std::string& what) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw ParseError("truncated checkpoint while reading " + what);
    return v;
}

inline void write_matrix(std::ostream& os, const Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) write_pod(os, m(r, c));
}

inline void read_matrix(std::istream& is, Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            m(r, c) = read_pod<double>(is, "matrix entry");
}

inline void write_vector(std::ostream& os, const Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) write_pod(os, v(i));
}

inline void read_vector(std::istream& is, Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = read_pod<double>(is, "vector entry");
}

} // namespace detail

inline void save_network(const NetworkState& st, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open '" + path + "' for writing");
    os.write("NNW1", 4);
    detail::write_pod<std::uint32_t>(os, st.config.head == HeadKind::identity ? 0 : 1);
    detail::write_pod<std::uint32_t>(os, st.config.loss == LossKind::mse ? 0 : 1);
    detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(st.config.input_dim));
    detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(st.config.output_dim));
    detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(st.config.hidden_sizes.size()));
    for (int h : st.config.hidden_sizes)
        detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(h));
    detail::write_pod<std::uint64_t>(os, st.config.seed);
    detail::write_pod<std::int64_t>(os, st.step);
    for (std::size_t l = 0; l < st.num_layers(); ++l) {
        detail::write_matrix(os, st.w[l]);
        detail::write_vector(os, st.b[l]);
    }
    for (std::size_t l = 0; l < st.num_layers(); ++l) {
        detail::write_matrix(os, st.m_w[l]);
        detail::write_vector(os, st.m_b[l]);
    }
    for (std::size_t l = 0; l < st.num_layers(); ++l) {
        detail::write_matrix(os, st.v_w[l]);
        detail::write_vector(os, st.v_b[l]);
    }
    if (!os) throw Error("failed writing checkpoint '" + path + "'");
}

inline NetworkState load_network(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open '" + path + "' for reading");
    char magic[4] = {};
    is.read(magic, 4);
    if (!is || std::string(magic, 4) != "NNW1")
        throw ParseError("'" + path + "' is not a network checkpoint");
    NetworkConfig cfg;
    cfg.head = detail::read_pod<std::uint32_t>(is, "head") == 0 ? HeadKind::identity : HeadKind::softmax;
    cfg.loss = detail::read_pod<std::uint32_t>(is, "loss") == 0 ? LossKind::mse : LossKind::cross_entropy;
    cfg.input_dim = static_cast<int>(detail::read_pod<std::uint32_t>(is, "input_dim"));
    cfg.output_dim = static_cast<int>(detail::read_pod<std::uint32_t>(is, "output_dim"));
    const auto n_hidden = detail::read_pod<std::uint32_t>(is, "hidden count");
    cfg.hidden_sizes.clear();
    for (std::uint32_t i = 0; i < n_hidden; ++i)
        cfg.hidden_sizes.push_back(static_cast<int>(detail::read_pod<std::uint32_t>(is, "hidden size")));
    cfg.seed = detail::read_pod<std::uint64_t>(is, "seed");
    const auto step = detail::read_pod<std::int64_t>(is, "step");
    cfg.validate();

    NetworkState st = init_network(cfg);
    st.step = step;
    for (std::size_t l = 0; l < st.num_layers(); ++l) {
        detail::read_matrix(is, st.w[l]);
        detail::read_vector(is, st.b[l]);
    }
    for (std::size_t l = 0; l < st.num_layers(); ++l) {
        detail::read_matrix(is, st.m_w[l]);
        detail::read_vector(is, st.m_b[l]);
    }
    for (std::size_t l = 0; l < st.num_layers(); ++l) {
        detail::read_matrix(is, st.v_w[l]);
        detail::read_vector(is, st.v_b[l]);
    }
    return st;
}

} // namespace crowdcl

#endif

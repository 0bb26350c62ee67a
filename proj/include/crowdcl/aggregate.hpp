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

#ifndef CROWDCL_AGGREGATE_HPP
#define CROWDCL_AGGREGATE_HPP

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "crowdcl/core.hpp"
#include "crowdcl/error.hpp"

namespace crowdcl {

enum class ConsensusMethod { mean, majority, dawid_skene, minmax_entropy };

/// Aggregated labels for one annotation set. `values` is filled by the mean
/// method, `labels` (class indices) by the voting and probabilistic methods,
/// and `posterior` (row-stochastic, items by classes) by the probabilistic
/// ones. Rows follow the annotation set's item order.
struct ConsensusResult {
    ConsensusMethod method = ConsensusMethod::mean;
    std::vector<std::string> item_ids;
    std::vector<double> values;
    std::vector<int> labels;
    Eigen::MatrixXd posterior;
    std::vector<std::string> dropped_items;

    int label_of(const std::string& id) const {
        for (std::size_t i = 0; i < item_ids.size(); ++i)
            if (item_ids[i] == id) return labels[i];
        throw DomainError("no consensus label for item '" + id + "'");
    }
};

/// Per-worker parameters: `sigma` holds the minmax ability matrices,
/// `confusion` the Dawid-Skene row-stochastic confusion matrices.
struct WorkerModel {
    std::vector<std::string> worker_ids;
    std::vector<Eigen::MatrixXd> sigma;
    std::vector<Eigen::MatrixXd> confusion;
};

/// Dual variables of one item from the minmax solver. The (c,k) entry measures
/// how likely the item in class c is labeled k by a randomly chosen worker.
struct ItemConfusion {
    std::string item_id;
    Eigen::MatrixXd tau;
};

// -------------------------------------------------------------------------
// Mean and majority vote
// -------------------------------------------------------------------------

inline ConsensusResult aggregate_mean(const AnnotationSet& ann) {
    if (!ann.label_space().is_numeric())
        throw DomainError("mean aggregation needs numeric (ordinal) labels");
    ConsensusResult res;
    res.method = ConsensusMethod::mean;
    res.item_ids = ann.item_ids();
    res.values.reserve(res.item_ids.size());
    for (int i = 0; i < ann.num_items(); ++i) {
        double sum = 0.0;
        for (const auto& e : ann.annotations_of(i)) sum += e.value;
        res.values.push_back(sum / ann.annotation_count(i));
    }
    return res;
}

namespace detail {

inline Eigen::MatrixXd vote_proportions(const AnnotationSet& ann) {
    const int k = ann.label_space().num_classes();
    Eigen::MatrixXd votes = Eigen::MatrixXd::Zero(ann.num_items(), k);
    for (const auto& rec : ann.records())
        votes(rec.item, ann.label_space().class_of(rec.value)) += 1.0;
    for (int i = 0; i < votes.rows(); ++i) votes.row(i) /= votes.row(i).sum();
    return votes;
}

} // namespace detail

/// Majority vote. A tie on the top count either drops the item (drop_ties) or
/// resolves to the lowest class index.
inline ConsensusResult aggregate_majority(const AnnotationSet& ann, bool drop_ties = false) {
    if (ann.empty()) throw DomainError("cannot aggregate an empty annotation set");
    const int k = ann.label_space().num_classes();
    ConsensusResult res;
    res.method = ConsensusMethod::majority;
    res.item_ids = ann.item_ids();
    res.labels.reserve(res.item_ids.size());
    for (int i = 0; i < ann.num_items(); ++i) {
        std::vector<int> counts(static_cast<std::size_t>(k), 0);
        for (const auto& e : ann.annotations_of(i))
            ++counts[static_cast<std::size_t>(ann.label_space().class_of(e.value))];
        int best = 0;
        for (int c = 1; c < k; ++c)
            if (counts[static_cast<std::size_t>(c)] > counts[static_cast<std::size_t>(best)]) best = c;
        bool tied = false;
        for (int c = 0; c < k; ++c)
            if (c != best && counts[static_cast<std::size_t>(c)] == counts[static_cast<std::size_t>(best)])
                tied = true;
        res.labels.push_back(best);
        if (tied && drop_ties)
            res.dropped_items.push_back(res.item_ids[static_cast<std::size_t>(i)]);
    }
    return res;
}

// -------------------------------------------------------------------------
// Dawid-Skene EM
// -------------------------------------------------------------------------

struct DawidSkeneOptions {
    int max_iter = 100;
    double tol = 1e-8;
    double smoothing = 1e-6; // additive smoothing of confusion counts
};

/// Jointly estimates posterior label probabilities and per-worker confusion
/// matrices. Posterior init from vote proportions; M-step re-estimates class
/// priors and smoothed confusion rows; E-step recomputes the posterior in log
/// space; stops when the largest posterior change falls below tol.
inline std::pair<ConsensusResult, WorkerModel> dawid_skene(const AnnotationSet& ann,
                                                           const DawidSkeneOptions& opt = {}) {
    if (ann.empty()) throw DomainError("cannot aggregate an empty annotation set");
    if (opt.max_iter < 1) throw DomainError("max_iter must be at least 1");
    if (opt.tol <= 0) throw DomainError("tol must be positive");

    const int n = ann.num_items();
    const int w = ann.num_workers();
    const int k = ann.label_space().num_classes();

    Eigen::MatrixXd q = detail::vote_proportions(ann);
    std::vector<Eigen::MatrixXd> confusion(static_cast<std::size_t>(w));

    for (int iter = 0; iter < opt.max_iter; ++iter) {
        // M-step
        Eigen::VectorXd prior = q.colwise().mean();
        for (auto& c : confusion) c = Eigen::MatrixXd::Zero(k, k);
        for (const auto& rec : ann.records()) {
            const int lab = ann.label_space().class_of(rec.value);
            confusion[static_cast<std::size_t>(rec.worker)].col(lab) += q.row(rec.item).transpose();
        }
        for (auto& c : confusion) {
            c.array() += opt.smoothing;
            for (int r = 0; r < k; ++r) c.row(r) /= c.row(r).sum();
        }
        // E-step, log space
        Eigen::MatrixXd logq(n, k);
        for (int c = 0; c < k; ++c)
            logq.col(c).setConstant(prior(c) > 0 ? std::log(prior(c))
                                                 : -std::numeric_limits<double>::infinity());
        for (const auto& rec : ann.records()) {
            const int lab = ann.label_space().class_of(rec.value);
            for (int c = 0; c < k; ++c)
                logq(rec.item, c) += std::log(confusion[static_cast<std::size_t>(rec.worker)](c, lab));
        }
        Eigen::MatrixXd qnew(n, k);
        for (int i = 0; i < n; ++i) {
            const double mx = logq.row(i).maxCoeff();
            qnew.row(i) = (logq.row(i).array() - mx).exp();
            qnew.row(i) /= qnew.row(i).sum();
        }
        const double delta = (qnew - q).cwiseAbs().maxCoeff();
        q = qnew;
        if (delta < opt.tol) break;
    }

    ConsensusResult res;
    res.method = ConsensusMethod::dawid_skene;
    res.item_ids = ann.item_ids();
    res.posterior = q;
    res.labels.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        Eigen::Index arg = 0;
        q.row(i).maxCoeff(&arg);
        res.labels[static_cast<std::size_t>(i)] = static_cast<int>(arg);
    }
    WorkerModel workers;
    workers.worker_ids = ann.worker_ids();
    workers.confusion = std::move(confusion);
    return {std::move(res), std::move(workers)};
}

// -------------------------------------------------------------------------
// Regularized minmax conditional entropy
// -------------------------------------------------------------------------

struct MinmaxOptions {
    double alpha = 0.25; // worker-ability regularizer weight
    double beta = 0.25;  // item-difficulty regularizer weight
    int outer_iters = 50;
    int inner_iters = 20;
    double tol = 1e-6;
    double initial_step = 0.1;
    std::vector<double>* objective_trace = nullptr; // accepted objective values, for diagnostics
};

struct MinmaxResult {
    ConsensusResult consensus;
    WorkerModel workers;
    std::vector<ItemConfusion> items;
};

namespace detail {

struct MinmaxWorkspace {
    const AnnotationSet& ann;
    int k;
    Eigen::MatrixXd q;                    // items x classes
    std::vector<Eigen::MatrixXd> sigma;   // per worker, k x k
    std::vector<Eigen::MatrixXd> tau;     // per item, k x k
    std::vector<int> record_class;        // cached class index per record

    explicit MinmaxWorkspace(const AnnotationSet& a) : ann(a), k(a.label_space().num_classes()) {
        q = vote_proportions(ann);
        sigma.assign(static_cast<std::size_t>(ann.num_workers()), Eigen::MatrixXd::Zero(k, k));
        tau.assign(static_cast<std::size_t>(ann.num_items()), Eigen::MatrixXd::Zero(k, k));
        record_class.reserve(ann.num_records());
        for (const auto& rec : ann.records())
            record_class.push_back(ann.label_space().class_of(rec.value));
    }

    // log P_ij(label | c) for every class c of one record, with its row
    // log-normalizers. scores = sigma_j + tau_i, softmaxed per row.
    void record_log_probs(std::size_t r, Eigen::VectorXd& out) const {
        const auto& rec = ann.records()[r];
        const int lab = record_class[r];
        const Eigen::MatrixXd& s = sigma[static_cast<std::size_t>(rec.worker)];
        const Eigen::MatrixXd& t = tau[static_cast<std::size_t>(rec.item)];
        for (int c = 0; c < k; ++c) {
            double mx = -std::numeric_limits<double>::infinity();
            for (int col = 0; col < k; ++col) mx = std::max(mx, s(c, col) + t(c, col));
            double lse = 0.0;
            for (int col = 0; col < k; ++col) lse += std::exp(s(c, col) + t(c, col) - mx);
            out(c) = s(c, lab) + t(c, lab) - mx - std::log(lse);
        }
    }

    double objective(double alpha, double beta) const {
        double obj = 0.0;
        Eigen::VectorXd logp(k);
        for (std::size_t r = 0; r < ann.records().size(); ++r) {
            record_log_probs(r, logp);
            obj += q.row(ann.records()[r].item).dot(logp);
        }
        for (const auto& s : sigma) obj -= 0.5 * alpha * s.squaredNorm();
        for (const auto& t : tau) obj -= 0.5 * beta * t.squaredNorm();
        return obj;
    }

    void gradients(double alpha, double beta, std::vector<Eigen::MatrixXd>& gs,
                   std::vector<Eigen::MatrixXd>& gt) const {
        for (std::size_t j = 0; j < sigma.size(); ++j) gs[j] = -alpha * sigma[j];
        for (std::size_t i = 0; i < tau.size(); ++i) gt[i] = -beta * tau[i];
        Eigen::VectorXd p(k);
        for (std::size_t r = 0; r < ann.records().size(); ++r) {
            const auto& rec = ann.records()[r];
            const int lab = record_class[r];
            const Eigen::MatrixXd& s = sigma[static_cast<std::size_t>(rec.worker)];
            const Eigen::MatrixXd& t = tau[static_cast<std::size_t>(rec.item)];
            Eigen::MatrixXd& grad_s = gs[static_cast<std::size_t>(rec.worker)];
            Eigen::MatrixXd& grad_t = gt[static_cast<std::size_t>(rec.item)];
            for (int c = 0; c < k; ++c) {
                const double qc = q(rec.item, c);
                if (qc == 0.0) continue;
                double mx = -std::numeric_limits<double>::infinity();
                for (int col = 0; col < k; ++col) mx = std::max(mx, s(c, col) + t(c, col));
                double z = 0.0;
                for (int col = 0; col < k; ++col) {
                    p(col) = std::exp(s(c, col) + t(c, col) - mx);
                    z += p(col);
                }
                for (int col = 0; col < k; ++col) {
                    const double g = qc * ((col == lab ? 1.0 : 0.0) - p(col) / z);
                    grad_s(c, col) += g;
                    grad_t(c, col) += g;
                }
            }
        }
    }

    // Posterior update with a uniform class prior, log-sum-exp normalized.
    // Returns the largest per-entry change.
    double update_posterior() {
        Eigen::MatrixXd logq = Eigen::MatrixXd::Zero(ann.num_items(), k);
        Eigen::VectorXd logp(k);
        for (std::size_t r = 0; r < ann.records().size(); ++r) {
            record_log_probs(r, logp);
            logq.row(ann.records()[r].item) += logp.transpose();
        }
        double delta = 0.0;
        for (int i = 0; i < logq.rows(); ++i) {
            const double mx = logq.row(i).maxCoeff();
            Eigen::RowVectorXd row = (logq.row(i).array() - mx).exp();
            row /= row.sum();
            delta = std::max(delta, (row - q.row(i)).cwiseAbs().maxCoeff());
            q.row(i) = row;
        }
        return delta;
    }
};

} // namespace detail

/// Coordinate ascent for the dual of the minmax conditional entropy objective.
/// Worker ability (sigma) and item difficulty (tau) parameterize
/// P_ij(k|c) = softmax_k(sigma_j(c,k) + tau_i(c,k)); given the posterior they
/// are fit by gradient ascent on the regularized expected log-likelihood, then
/// the posterior is recomputed from the fitted P. Deterministic.
inline MinmaxResult minmax_entropy(const AnnotationSet& ann, const MinmaxOptions& opt = {}) {
    if (ann.empty()) throw DomainError("cannot aggregate an empty annotation set");
    if (opt.alpha <= 0 || opt.beta <= 0) throw DomainError("alpha and beta must be positive");

    detail::MinmaxWorkspace ws(ann);
    const auto n_workers = static_cast<std::size_t>(ann.num_workers());
    const auto n_items = static_cast<std::size_t>(ann.num_items());
    std::vector<Eigen::MatrixXd> grad_s(n_workers), grad_t(n_items);

    for (int outer = 0; outer < opt.outer_iters; ++outer) {
        // (a) fit sigma/tau by gradient ascent with backtracking halving
        double step = opt.initial_step;
        double current = ws.objective(opt.alpha, opt.beta);
        if (!std::isfinite(current)) throw NumericalError("minmax objective is not finite");
        if (opt.objective_trace) opt.objective_trace->push_back(current);
        for (int inner = 0; inner < opt.inner_iters && step > 1e-12; ++inner) {
            ws.gradients(opt.alpha, opt.beta, grad_s, grad_t);
            const std::vector<Eigen::MatrixXd> save_s = ws.sigma;
            const std::vector<Eigen::MatrixXd> save_t = ws.tau;
            while (step > 1e-12) {
                for (std::size_t j = 0; j < n_workers; ++j) ws.sigma[j] = save_s[j] + step * grad_s[j];
                for (std::size_t i = 0; i < n_items; ++i) ws.tau[i] = save_t[i] + step * grad_t[i];
                const double proposed = ws.objective(opt.alpha, opt.beta);
                if (!std::isfinite(proposed)) throw NumericalError("minmax objective is not finite");
                if (proposed >= current) {
                    current = proposed;
                    if (opt.objective_trace) opt.objective_trace->push_back(current);
                    break;
                }
                step *= 0.5;
            }
            if (step <= 1e-12) {
                ws.sigma = save_s;
                ws.tau = save_t;
            }
        }
        // (b) posterior update
        const double delta = ws.update_posterior();
        if (delta < opt.tol) break;
    }

    MinmaxResult out;
    out.consensus.method = ConsensusMethod::minmax_entropy;
    out.consensus.item_ids = ann.item_ids();
    out.consensus.posterior = ws.q;
    out.consensus.labels.resize(n_items);
    for (int i = 0; i < ann.num_items(); ++i) {
        Eigen::Index arg = 0;
        ws.q.row(i).maxCoeff(&arg);
        out.consensus.labels[static_cast<std::size_t>(i)] = static_cast<int>(arg);
    }
    out.workers.worker_ids = ann.worker_ids();
    out.workers.sigma = std::move(ws.sigma);
    out.items.reserve(n_items);
    for (std::size_t i = 0; i < n_items; ++i)
        out.items.push_back({ann.item_ids()[i], std::move(ws.tau[i])});
    return out;
}

} // namespace crowdcl

#endif

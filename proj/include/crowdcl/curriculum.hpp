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

#ifndef CROWDCL_CURRICULUM_HPP
#define CROWDCL_CURRICULUM_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "crowdcl/core.hpp"
#include "crowdcl/difficulty.hpp"
#include "crowdcl/error.hpp"
#include "crowdcl/metrics.hpp"
#include "crowdcl/net.hpp"

namespace crowdcl {

/// Candidate learning rates for the per-bin search, largest first.
struct LrGrid {
    std::vector<double> rates = {0.1,     0.05,     0.01,      0.005,    0.001,    0.0005,
                                 0.0001,  0.00005,  0.00001,   0.000005, 0.000001};

    void validate() const {
        if (rates.empty()) throw DomainError("learning-rate grid is empty");
        for (std::size_t i = 0; i < rates.size(); ++i) {
            if (rates[i] <= 0) throw DomainError("learning rates must be positive");
            if (i > 0 && rates[i] >= rates[i - 1])
                throw DomainError("learning-rate grid must be strictly decreasing");
        }
    }

    bool contains(double r) const {
        for (double g : rates)
            if (g == r) return true;
        return false;
    }
};

/// Easiest-first training plan: stage b trains on the union of bins 1..b for
/// epochs_per_stage epochs at rates[b-1].
struct CurriculumSchedule {
    std::vector<std::vector<std::string>> bins;
    std::vector<double> rates;
    int epochs_per_stage = 50;

    void validate(const std::vector<std::string>& train_ids) const {
        if (bins.empty()) throw DomainError("schedule has no bins");
        if (rates.size() != bins.size())
            throw DomainError("schedule needs exactly one learning rate per bin");
        for (double r : rates)
            if (!(r > 0)) throw DomainError("learning rates must be positive");
        if (epochs_per_stage < 0) throw DomainError("epochs_per_stage must be non-negative");
        std::set<std::string> seen;
        std::size_t total = 0;
        for (const auto& bin : bins) {
            total += bin.size();
            for (const auto& id : bin)
                if (!seen.insert(id).second)
                    throw DomainError("item '" + id + "' appears in more than one bin");
        }
        if (total != train_ids.size())
            throw DomainError("bins do not cover the training set");
        for (const auto& id : train_ids)
            if (seen.find(id) == seen.end())
                throw DomainError("training item '" + id + "' missing from bins");
    }
};

/// The published five-bin search outcome, used as the default schedule when
/// no search is run. Other bin counts reuse the nearest entry.
inline std::vector<double> default_stage_rates(int n_bins) {
    static const std::vector<double> five = {0.001, 0.0005, 0.0001, 0.00005, 0.00001};
    std::vector<double> out;
    for (int b = 0; b < n_bins; ++b)
        out.push_back(five[static_cast<std::size_t>(std::min(b, 4))]);
    return out;
}

namespace detail {

inline std::vector<std::size_t> bin_sizes(std::size_t n, int n_bins) {
    const auto bins = static_cast<std::size_t>(n_bins);
    std::vector<std::size_t> sizes(bins, n / bins);
    for (std::size_t b = 0; b < n % bins; ++b) ++sizes[b];
    return sizes;
}

inline std::vector<std::vector<std::string>> split_in_order(const std::vector<std::string>& ordered,
                                                            int n_bins) {
    const auto sizes = bin_sizes(ordered.size(), n_bins);
    std::vector<std::vector<std::string>> bins;
    std::size_t pos = 0;
    for (std::size_t sz : sizes) {
        std::vector<std::string> bin(ordered.begin() + static_cast<std::ptrdiff_t>(pos),
                                     ordered.begin() + static_cast<std::ptrdiff_t>(pos + sz));
        std::sort(bin.begin(), bin.end());
        bins.push_back(std::move(bin));
        pos += sz;
    }
    return bins;
}

} // namespace detail

/// Quantile split of the training ids by ascending (difficulty, item id).
/// The first (N mod n) bins take the extra items.
inline std::vector<std::vector<std::string>> make_bins(const DifficultyScore& scores,
                                                       const std::vector<std::string>& train_ids,
                                                       int n_bins = 5) {
    if (n_bins < 1) throw DomainError("n_bins must be at least 1");
    if (static_cast<std::size_t>(n_bins) > train_ids.size())
        throw DomainError("more bins than training items");
    std::vector<std::pair<double, std::string>> order;
    order.reserve(train_ids.size());
    for (const auto& id : train_ids) order.emplace_back(scores.at(id), id);
    std::sort(order.begin(), order.end());
    std::vector<std::string> ordered;
    ordered.reserve(order.size());
    for (auto& [d, id] : order) ordered.push_back(std::move(id));
    return detail::split_in_order(ordered, n_bins);
}

/// Uniform random partition with the same bin sizes as make_bins.
inline std::vector<std::vector<std::string>> make_random_bins(std::vector<std::string> train_ids,
                                                              int n_bins, std::uint64_t seed) {
    if (n_bins < 1) throw DomainError("n_bins must be at least 1");
    if (static_cast<std::size_t>(n_bins) > train_ids.size())
        throw DomainError("more bins than training items");
    std::sort(train_ids.begin(), train_ids.end());
    std::mt19937_64 rng(seed);
    std::shuffle(train_ids.begin(), train_ids.end(), rng);
    return detail::split_in_order(train_ids, n_bins);
}

// -------------------------------------------------------------------------
// Task dataset: features plus per-item targets and the three id pools
// -------------------------------------------------------------------------

/// One fully prepared learning problem. `reg_targets` drives the regression
/// task, `cls_targets` the binary and multiclass tasks. Id pools are kept
/// sorted; matrix assembly always follows sorted-id order so training is
/// independent of any file storage order.
struct TaskDataset {
    TaskKind task = TaskKind::regression;
    int num_classes = 0;
    const FeatureMatrix* features = nullptr;
    std::map<std::string, double> reg_targets;
    std::map<std::string, int> cls_targets;
    std::vector<std::string> train_ids, dev_ids, test_ids;

    bool is_regression() const { return task == TaskKind::regression; }

    void validate() const {
        if (features == nullptr) throw DomainError("task dataset has no feature matrix");
        if (!is_regression() && num_classes < 2)
            throw DomainError("classification needs at least 2 classes");
        auto check_pool = [&](const std::vector<std::string>& ids, const char* name) {
            if (ids.empty()) throw DomainError(std::string(name) + " pool is empty");
            if (!std::is_sorted(ids.begin(), ids.end()))
                throw DomainError(std::string(name) + " pool is not sorted");
            for (const auto& id : ids) {
                if (features->index_of(id) < 0)
                    throw DomainError("no features for item '" + id + "'");
                if (is_regression()) {
                    if (reg_targets.find(id) == reg_targets.end())
                        throw DomainError("no target for item '" + id + "'");
                } else {
                    auto it = cls_targets.find(id);
                    if (it == cls_targets.end())
                        throw DomainError("no target for item '" + id + "'");
                    if (it->second < 0 || it->second >= num_classes)
                        throw DomainError("class target of item '" + id + "' out of range");
                }
            }
        };
        check_pool(train_ids, "train");
        check_pool(dev_ids, "dev");
        check_pool(test_ids, "test");
    }

    NetworkConfig network_config(std::vector<int> hidden_sizes, std::uint64_t seed = 0) const {
        NetworkConfig cfg;
        cfg.input_dim = features->dim();
        cfg.hidden_sizes = std::move(hidden_sizes);
        if (is_regression()) {
            cfg.output_dim = 1;
            cfg.head = HeadKind::identity;
            cfg.loss = LossKind::mse;
        } else {
            cfg.output_dim = num_classes;
            cfg.head = HeadKind::softmax;
            cfg.loss = LossKind::cross_entropy;
        }
        cfg.seed = seed;
        return cfg;
    }
};

/// Features and targets for the given ids, in the given order.
inline std::pair<Eigen::MatrixXd, Targets> assemble(const TaskDataset& ds,
                                                    const std::vector<std::string>& ids) {
    Eigen::MatrixXd x = ds.features->gather(ids);
    Targets t;
    if (ds.is_regression()) {
        Eigen::VectorXd y(static_cast<Eigen::Index>(ids.size()));
        for (std::size_t i = 0; i < ids.size(); ++i) y(static_cast<Eigen::Index>(i)) = ds.reg_targets.at(ids[i]);
        t = Targets::regression(std::move(y));
    } else {
        std::vector<int> classes;
        classes.reserve(ids.size());
        for (const auto& id : ids) classes.push_back(ds.cls_targets.at(id));
        t = Targets::classification(std::move(classes));
    }
    return {std::move(x), std::move(t)};
}

/// Task metric on one id pool: CCC for regression, macro F-score otherwise.
inline double evaluate_metric(const NetworkState& st, const TaskDataset& ds,
                              const std::vector<std::string>& ids) {
    auto [x, targets] = assemble(ds, ids);
    const Eigen::MatrixXd out = forward(st, x);
    if (ds.is_regression()) {
        std::vector<double> pred(static_cast<std::size_t>(out.rows()));
        std::vector<double> truth(static_cast<std::size_t>(out.rows()));
        for (Eigen::Index i = 0; i < out.rows(); ++i) {
            pred[static_cast<std::size_t>(i)] = out(i, 0);
            truth[static_cast<std::size_t>(i)] = targets.values(i, 0);
        }
        return ccc(pred, truth);
    }
    std::vector<int> pred(static_cast<std::size_t>(out.rows()));
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        Eigen::Index arg = 0;
        out.row(i).maxCoeff(&arg);
        pred[static_cast<std::size_t>(i)] = static_cast<int>(arg);
    }
    return macro_f1(pred, targets.classes, ds.num_classes);
}

// -------------------------------------------------------------------------
// Training drivers
// -------------------------------------------------------------------------

struct StageMetrics {
    int stage = 0; // 1-based
    int pool_size = 0;
    double train_loss = 0.0; // last epoch of the stage
    double dev_metric = 0.0;
    double test_metric = 0.0;
};

struct TrialResult {
    std::uint64_t seed = 0;
    std::vector<StageMetrics> stages;

    double final_dev() const { return stages.back().dev_metric; }
    double final_test() const { return stages.back().test_metric; }
};

namespace detail {

// Item-order stream for one (trial, stage) pair; stages get distinct,
// reproducible shuffles regardless of pool composition.
inline std::uint64_t stage_order_seed(std::uint64_t trial_seed, int stage) {
    return trial_seed + 1000003ULL * static_cast<std::uint64_t>(stage);
}

// Sorted unions of bins 1..b for every stage b.
inline std::vector<std::vector<std::string>> cumulative_pools(
    const std::vector<std::vector<std::string>>& bins) {
    std::vector<std::vector<std::string>> pools;
    std::vector<std::string> pool;
    for (const auto& bin : bins) {
        pool.insert(pool.end(), bin.begin(), bin.end());
        std::sort(pool.begin(), pool.end());
        pools.push_back(pool);
    }
    return pools;
}

} // namespace detail

/// Runs the schedule once per seed: a fresh network per trial, stages adding
/// bins easiest-first, dev and test metrics recorded after every stage.
inline std::vector<TrialResult> train_curriculum(const TaskDataset& ds,
                                                 const CurriculumSchedule& schedule,
                                                 const NetworkConfig& net_cfg,
                                                 const std::vector<std::uint64_t>& seeds,
                                                 int batch_size = 128) {
    ds.validate();
    schedule.validate(ds.train_ids);
    if (seeds.empty()) throw DomainError("need at least one trial seed");

    const auto pools = detail::cumulative_pools(schedule.bins);
    std::vector<TrialResult> trials;
    trials.reserve(seeds.size());
    for (std::uint64_t seed : seeds) {
        NetworkConfig cfg = net_cfg;
        cfg.seed = seed;
        NetworkState state = init_network(cfg);
        TrialResult trial;
        trial.seed = seed;
        for (std::size_t b = 0; b < pools.size(); ++b) {
            auto [x, targets] = assemble(ds, pools[b]);
            const auto trace =
                train_epochs(state, x, targets, detail::stage_order_seed(seed, static_cast<int>(b) + 1),
                             schedule.epochs_per_stage, schedule.rates[b], batch_size);
            StageMetrics sm;
            sm.stage = static_cast<int>(b) + 1;
            sm.pool_size = static_cast<int>(pools[b].size());
            sm.train_loss = trace.empty() ? 0.0 : trace.back();
            sm.dev_metric = evaluate_metric(state, ds, ds.dev_ids);
            sm.test_metric = evaluate_metric(state, ds, ds.test_ids);
            trial.stages.push_back(sm);
        }
        trials.push_back(std::move(trial));
    }
    return trials;
}

/// One-pass baseline: the whole training set as a single stage.
inline std::vector<TrialResult> train_plain(const TaskDataset& ds, const NetworkConfig& net_cfg,
                                            const std::vector<std::uint64_t>& seeds, int epochs = 100,
                                            double lr = 0.0005, int batch_size = 128) {
    CurriculumSchedule schedule;
    std::vector<std::string> all = ds.train_ids;
    std::sort(all.begin(), all.end());
    schedule.bins.push_back(std::move(all));
    schedule.rates.push_back(lr);
    schedule.epochs_per_stage = epochs;
    return train_curriculum(ds, schedule, net_cfg, seeds, batch_size);
}

// -------------------------------------------------------------------------
// Greedy per-stage learning-rate search
// -------------------------------------------------------------------------

/// Stage by stage, trains every candidate rate from a snapshot of the state
/// reached after the previous stage, keeps the dev-best rate (first grid
/// entry wins ties), and continues from that branch. `train_stage(state,
/// stage_index, lr)` mutates the state; `dev_metric(state)` scores it.
template <typename TrainStageFn, typename DevMetricFn>
std::vector<double> greedy_lr_search_core(NetworkState state, int n_bins, const LrGrid& grid,
                                          TrainStageFn&& train_stage, DevMetricFn&& dev_metric) {
    grid.validate();
    if (n_bins < 1) throw DomainError("need at least one bin");
    std::vector<double> chosen;
    for (int b = 0; b < n_bins; ++b) {
        double best_metric = -std::numeric_limits<double>::infinity();
        double best_rate = grid.rates.front();
        NetworkState best_state;
        for (double rate : grid.rates) {
            NetworkState candidate = state;
            train_stage(candidate, b, rate);
            const double m = dev_metric(candidate);
            if (m > best_metric) {
                best_metric = m;
                best_rate = rate;
                best_state = std::move(candidate);
            }
        }
        chosen.push_back(best_rate);
        state = std::move(best_state);
    }
    return chosen;
}

/// Dataset-level search: candidates within one stage share the same item
/// order so they differ only in the rate. Deterministic per search_seed.
inline std::vector<double> greedy_lr_search(const TaskDataset& ds,
                                            const std::vector<std::vector<std::string>>& bins,
                                            const LrGrid& grid, const NetworkConfig& net_cfg,
                                            int epochs_per_stage, std::uint64_t search_seed,
                                            int batch_size = 128) {
    ds.validate();
    if (bins.empty()) throw DomainError("need at least one bin");
    if (epochs_per_stage < 0) throw DomainError("epochs_per_stage must be non-negative");
    const auto pools = detail::cumulative_pools(bins);
    NetworkConfig cfg = net_cfg;
    cfg.seed = search_seed;
    return greedy_lr_search_core(
        init_network(cfg), static_cast<int>(bins.size()), grid,
        [&](NetworkState& st, int stage, double lr) {
            auto [x, targets] = assemble(ds, pools[static_cast<std::size_t>(stage)]);
            train_epochs(st, x, targets, detail::stage_order_seed(search_seed, stage + 1),
                         epochs_per_stage, lr, batch_size);
        },
        [&](const NetworkState& st) { return evaluate_metric(st, ds, ds.dev_ids); });
}

} // namespace crowdcl

#endif

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

#ifndef CROWDCL_SYNTH_HPP
#define CROWDCL_SYNTH_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "crowdcl/core.hpp"
#include "crowdcl/error.hpp"

namespace crowdcl {

/// Generator settings. Item difficulty delta is uniform on (0,1); worker
/// ability is normal(ability_mean, ability_sd). noise_scale controls both the
/// label noise and the difficulty-dependent feature noise.
struct SimConfig {
    int n_items = 0;
    int n_workers = 0;
    int labels_per_item = 5;
    LabelSpace label_space = LabelSpace::ordinal(7);
    int feature_dim = 8;
    double ability_mean = 1.0;
    double ability_sd = 1.0;
    double noise_scale = 1.0;
    std::uint64_t seed = 0;
    // Pins chosen workers' abilities after the draw; the random stream is
    // unaffected, so overridden and plain runs share all other randomness.
    std::map<int, double> ability_override;

    void validate() const {
        if (n_items < 1) throw DomainError("n_items must be positive");
        if (n_workers < 1) throw DomainError("n_workers must be positive");
        if (labels_per_item < 1) throw DomainError("labels_per_item must be positive");
        if (labels_per_item > n_workers)
            throw DomainError("labels_per_item cannot exceed n_workers");
        if (feature_dim < 1) throw DomainError("feature_dim must be positive");
        if (noise_scale < 0) throw DomainError("noise_scale must be non-negative");
        if (ability_sd < 0) throw DomainError("ability_sd must be non-negative");
        for (const auto& [j, a] : ability_override) {
            if (j < 0 || j >= n_workers) throw DomainError("ability_override index out of range");
            if (!std::isfinite(a)) throw DomainError("ability_override value must be finite");
        }
    }
};

/// The generator's hidden state, kept for oracle checks: true values, item
/// difficulties, worker abilities, and which workers labeled which item.
struct SimTruth {
    std::vector<std::string> item_ids;
    std::vector<double> true_value; // class index or real score
    std::vector<double> delta;
    std::vector<std::string> worker_ids;
    std::vector<double> ability;
    std::vector<std::vector<std::string>> assigned_workers;
};

namespace detail {

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline std::string format_id(const char* prefix, int index, int width) {
    std::ostringstream os;
    os << prefix << std::setw(width) << std::setfill('0') << index;
    return os.str();
}

// Draws shared by both generators, in a fixed order: per-item difficulty,
// per-worker ability, then the class/score direction vectors.
struct SimDraws {
    std::vector<double> delta;
    std::vector<double> ability;
    std::vector<Eigen::VectorXd> directions;

    SimDraws(const SimConfig& cfg, int n_directions, std::mt19937_64& rng) {
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        delta.reserve(static_cast<std::size_t>(cfg.n_items));
        for (int i = 0; i < cfg.n_items; ++i) delta.push_back(unif(rng));
        ability.reserve(static_cast<std::size_t>(cfg.n_workers));
        if (cfg.ability_sd > 0) {
            std::normal_distribution<double> normal(cfg.ability_mean, cfg.ability_sd);
            for (int j = 0; j < cfg.n_workers; ++j) ability.push_back(normal(rng));
        } else {
            ability.assign(static_cast<std::size_t>(cfg.n_workers), cfg.ability_mean);
        }
        for (const auto& [j, a] : cfg.ability_override) ability[static_cast<std::size_t>(j)] = a;
        std::normal_distribution<double> std_normal(0.0, 1.0);
        directions.reserve(static_cast<std::size_t>(n_directions));
        for (int d = 0; d < n_directions; ++d) {
            Eigen::VectorXd v(cfg.feature_dim);
            for (int k = 0; k < cfg.feature_dim; ++k) v(k) = std_normal(rng);
            const double norm = v.norm();
            if (norm > 0) v /= norm;
            directions.push_back(std::move(v));
        }
    }
};

inline std::vector<int> pick_workers(int n_workers, int m, std::mt19937_64& rng) {
    std::vector<int> all(static_cast<std::size_t>(n_workers));
    std::iota(all.begin(), all.end(), 0);
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(static_cast<std::size_t>(m));
    std::sort(all.begin(), all.end());
    return all;
}

} // namespace detail

/// Categorical labels: the true class is uniform; a worker answers correctly
/// with probability logistic(ability − 4*delta), otherwise uniformly over the
/// wrong classes. Features sit at the unit class-mean direction plus Gaussian
/// noise whose scale grows with item difficulty.
inline std::tuple<AnnotationSet, FeatureMatrix, SimTruth> simulate_categorical(const SimConfig& cfg) {
    cfg.validate();
    if (cfg.label_space.kind() != LabelKind::categorical)
        throw DomainError("simulate_categorical needs a categorical label space");
    const int k = cfg.label_space.num_classes();

    std::mt19937_64 rng(cfg.seed);
    detail::SimDraws draws(cfg, k, rng);
    std::uniform_int_distribution<int> class_dist(0, k - 1);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_int_distribution<int> wrong_dist(0, k - 2);
    std::normal_distribution<double> std_normal(0.0, 1.0);

    SimTruth truth;
    truth.delta = draws.delta;
    truth.ability = draws.ability;
    for (int j = 0; j < cfg.n_workers; ++j)
        truth.worker_ids.push_back(detail::format_id("w", j, 4));

    std::vector<AnnotationRecord> records;
    Eigen::MatrixXd features(cfg.n_items, cfg.feature_dim);
    for (int i = 0; i < cfg.n_items; ++i) {
        const std::string item_id = detail::format_id("item", i, 6);
        truth.item_ids.push_back(item_id);
        const int true_class = class_dist(rng);
        truth.true_value.push_back(true_class);

        const double feat_sd = cfg.noise_scale * (0.5 + draws.delta[static_cast<std::size_t>(i)]);
        features.row(i) = draws.directions[static_cast<std::size_t>(true_class)].transpose();
        if (feat_sd > 0)
            for (int d = 0; d < cfg.feature_dim; ++d)
                features(i, d) += feat_sd * std_normal(rng);

        const auto workers = detail::pick_workers(cfg.n_workers, cfg.labels_per_item, rng);
        std::vector<std::string> assigned;
        for (int j : workers) {
            const double p_correct = detail::logistic(draws.ability[static_cast<std::size_t>(j)] -
                                                      4.0 * draws.delta[static_cast<std::size_t>(i)]);
            int emitted = true_class;
            if (unif(rng) >= p_correct && k > 1) {
                const int o = wrong_dist(rng);
                emitted = o >= true_class ? o + 1 : o;
            }
            records.push_back({item_id, truth.worker_ids[static_cast<std::size_t>(j)],
                               static_cast<double>(emitted)});
            assigned.push_back(truth.worker_ids[static_cast<std::size_t>(j)]);
        }
        truth.assigned_workers.push_back(std::move(assigned));
    }

    AnnotationSet ann(cfg.label_space, records);
    FeatureMatrix fm(truth.item_ids, std::move(features));
    return {std::move(ann), std::move(fm), std::move(truth)};
}

/// Ordinal labels: the true score is uniform on [1, L]; a worker reports the
/// rounded, clamped score plus Gaussian noise that grows with item difficulty
/// and shrinks with worker ability. Features are the score times a unit
/// direction plus difficulty-scaled noise.
inline std::tuple<AnnotationSet, FeatureMatrix, SimTruth> simulate_ordinal(const SimConfig& cfg) {
    cfg.validate();
    if (cfg.label_space.kind() != LabelKind::ordinal)
        throw DomainError("simulate_ordinal needs an ordinal label space");
    const int levels = cfg.label_space.num_levels();

    std::mt19937_64 rng(cfg.seed);
    detail::SimDraws draws(cfg, 1, rng);
    std::uniform_real_distribution<double> value_dist(1.0, static_cast<double>(levels));
    std::normal_distribution<double> std_normal(0.0, 1.0);

    SimTruth truth;
    truth.delta = draws.delta;
    truth.ability = draws.ability;
    for (int j = 0; j < cfg.n_workers; ++j)
        truth.worker_ids.push_back(detail::format_id("w", j, 4));

    std::vector<AnnotationRecord> records;
    Eigen::MatrixXd features(cfg.n_items, cfg.feature_dim);
    for (int i = 0; i < cfg.n_items; ++i) {
        const std::string item_id = detail::format_id("item", i, 6);
        truth.item_ids.push_back(item_id);
        const double v = value_dist(rng);
        truth.true_value.push_back(v);

        const double feat_sd = cfg.noise_scale * (0.5 + draws.delta[static_cast<std::size_t>(i)]);
        features.row(i) = v * draws.directions[0].transpose();
        if (feat_sd > 0)
            for (int d = 0; d < cfg.feature_dim; ++d)
                features(i, d) += feat_sd * std_normal(rng);

        const auto workers = detail::pick_workers(cfg.n_workers, cfg.labels_per_item, rng);
        std::vector<std::string> assigned;
        for (int j : workers) {
            const double sd = cfg.noise_scale * (0.5 + draws.delta[static_cast<std::size_t>(i)]) /
                              detail::logistic(draws.ability[static_cast<std::size_t>(j)]);
            double noisy = v;
            if (sd > 0) noisy += sd * std_normal(rng);
            noisy = std::clamp(noisy, 1.0, static_cast<double>(levels));
            const double score = static_cast<double>(std::lround(noisy));
            records.push_back({item_id, truth.worker_ids[static_cast<std::size_t>(j)], score});
            assigned.push_back(truth.worker_ids[static_cast<std::size_t>(j)]);
        }
        truth.assigned_workers.push_back(std::move(assigned));
    }

    AnnotationSet ann(cfg.label_space, records);
    FeatureMatrix fm(truth.item_ids, std::move(features));
    return {std::move(ann), std::move(fm), std::move(truth)};
}

/// Oracle file consumed only by tests: true values, difficulties, abilities,
/// and per-item worker assignments.
inline void save_truth(const SimTruth& truth, const std::string& path) {
    nlohmann::json items = nlohmann::json::object();
    for (std::size_t i = 0; i < truth.item_ids.size(); ++i) {
        items[truth.item_ids[i]] = {{"true_value", truth.true_value[i]},
                                    {"delta", truth.delta[i]},
                                    {"workers", truth.assigned_workers[i]}};
    }
    nlohmann::json workers = nlohmann::json::object();
    for (std::size_t j = 0; j < truth.worker_ids.size(); ++j)
        workers[truth.worker_ids[j]] = truth.ability[j];
    nlohmann::json doc = {{"items", items}, {"workers", workers}};
    std::ofstream os(path);
    if (!os) throw Error("cannot open '" + path + "' for writing");
    os << std::setprecision(17) << doc.dump(2) << '\n';
}

inline SimTruth load_truth(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open '" + path + "' for reading");
    nlohmann::json doc;
    try {
        is >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid truth file: ") + e.what());
    }
    SimTruth truth;
    for (const auto& [id, entry] : doc.at("items").items()) {
        truth.item_ids.push_back(id);
        truth.true_value.push_back(entry.at("true_value").get<double>());
        truth.delta.push_back(entry.at("delta").get<double>());
        truth.assigned_workers.push_back(entry.at("workers").get<std::vector<std::string>>());
    }
    for (const auto& [id, ab] : doc.at("workers").items()) {
        truth.worker_ids.push_back(id);
        truth.ability.push_back(ab.get<double>());
    }
    return truth;
}

} // namespace crowdcl

#endif

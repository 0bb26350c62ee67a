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

#ifndef CROWDCL_DIFFICULTY_HPP
#define CROWDCL_DIFFICULTY_HPP

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "crowdcl/aggregate.hpp"
#include "crowdcl/core.hpp"
#include "crowdcl/error.hpp"

namespace crowdcl {

enum class CriterionKind { c1_error, c2_disagreement, c3_minmax };
enum class TaskKind { regression, binary, multiclass };

inline const char* to_string(CriterionKind c) {
    switch (c) {
        case CriterionKind::c1_error: return "c1_error";
        case CriterionKind::c2_disagreement: return "c2_disagreement";
        case CriterionKind::c3_minmax: return "c3_minmax";
    }
    return "?";
}

inline const char* to_string(TaskKind t) {
    switch (t) {
        case TaskKind::regression: return "regression";
        case TaskKind::binary: return "binary";
        case TaskKind::multiclass: return "multiclass";
    }
    return "?";
}

/// Per-item difficulty under one criterion. Sorting `scores` ascending always
/// yields easiest-first order; every score is finite.
struct DifficultyScore {
    CriterionKind criterion = CriterionKind::c2_disagreement;
    TaskKind task = TaskKind::regression;
    std::map<std::string, double> scores;

    double at(const std::string& id) const {
        auto it = scores.find(id);
        if (it == scores.end()) throw DomainError("no difficulty score for item '" + id + "'");
        return it->second;
    }
};

/// One model prediction. Regression fills `value`; classification fills
/// `predicted_class` and `confidence` (the probability the head assigned to
/// the predicted class, in [0,1]).
struct Prediction {
    std::string item_id;
    double value = 0.0;
    int predicted_class = -1;
    double confidence = 0.0;
};

namespace detail {

inline void check_finite_scores(const DifficultyScore& s) {
    for (const auto& [id, d] : s.scores)
        if (!std::isfinite(d)) throw NumericalError("difficulty of item '" + id + "' is not finite");
}

} // namespace detail

/// d_i = |y_i − y'_i|: distance of the model prediction from the consensus.
inline DifficultyScore criterion1_regression(const std::map<std::string, double>& truth,
                                             const std::map<std::string, double>& preds) {
    if (truth.size() != preds.size())
        throw DomainError("truth and prediction key sets differ in size");
    DifficultyScore out;
    out.criterion = CriterionKind::c1_error;
    out.task = TaskKind::regression;
    for (const auto& [id, y] : truth) {
        auto it = preds.find(id);
        if (it == preds.end()) throw DomainError("no prediction for item '" + id + "'");
        out.scores[id] = std::abs(y - it->second);
    }
    detail::check_finite_scores(out);
    return out;
}

/// Signed-confidence difficulty: −confidence when the model is right,
/// +confidence when it is wrong, so confidently correct items sort first and
/// confidently wrong items last.
inline DifficultyScore criterion1_classification(const std::map<std::string, int>& truth,
                                                 const std::map<std::string, Prediction>& preds,
                                                 TaskKind task = TaskKind::multiclass) {
    if (truth.size() != preds.size())
        throw DomainError("truth and prediction key sets differ in size");
    DifficultyScore out;
    out.criterion = CriterionKind::c1_error;
    out.task = task;
    for (const auto& [id, cls] : truth) {
        auto it = preds.find(id);
        if (it == preds.end()) throw DomainError("no prediction for item '" + id + "'");
        const Prediction& p = it->second;
        if (p.confidence < 0.0 || p.confidence > 1.0)
            throw DomainError("confidence of item '" + id + "' outside [0,1]");
        out.scores[id] = (p.predicted_class == cls) ? -p.confidence : p.confidence;
    }
    detail::check_finite_scores(out);
    return out;
}

/// Population variance of the scores each item received (denominator N_i).
inline DifficultyScore criterion2_regression(const AnnotationSet& ann) {
    if (!ann.label_space().is_numeric())
        throw DomainError("variance difficulty needs numeric (ordinal) labels");
    DifficultyScore out;
    out.criterion = CriterionKind::c2_disagreement;
    out.task = TaskKind::regression;
    for (int i = 0; i < ann.num_items(); ++i) {
        const auto entries = ann.annotations_of(i);
        double mean = 0.0;
        for (const auto& e : entries) mean += e.value;
        mean /= static_cast<double>(entries.size());
        double var = 0.0;
        for (const auto& e : entries) var += (e.value - mean) * (e.value - mean);
        out.scores[ann.item_ids()[static_cast<std::size_t>(i)]] =
            var / static_cast<double>(entries.size());
    }
    detail::check_finite_scores(out);
    return out;
}

namespace detail {

// 1 − (majority votes)/N_i over an explicit per-item class-vote list.
inline double minority_ratio(const std::vector<int>& votes, int num_classes) {
    std::vector<int> counts(static_cast<std::size_t>(num_classes), 0);
    for (int v : votes) ++counts[static_cast<std::size_t>(v)];
    int best = 0;
    for (int c : counts) best = std::max(best, c);
    return 1.0 - static_cast<double>(best) / static_cast<double>(votes.size());
}

} // namespace detail

/// Vote-agreement difficulty: 1 minus the fraction of votes on the most
/// popular class. Unanimity gives 0; a flat tie gives the largest value.
inline DifficultyScore criterion2_categorical(const AnnotationSet& ann) {
    DifficultyScore out;
    out.criterion = CriterionKind::c2_disagreement;
    out.task = TaskKind::multiclass;
    const int k = ann.label_space().num_classes();
    for (int i = 0; i < ann.num_items(); ++i) {
        std::vector<int> votes;
        for (const auto& e : ann.annotations_of(i))
            votes.push_back(ann.label_space().class_of(e.value));
        out.scores[ann.item_ids()[static_cast<std::size_t>(i)]] = detail::minority_ratio(votes, k);
    }
    detail::check_finite_scores(out);
    return out;
}

/// Difficulty from the minmax dual variables: exp-normalize each row of tau
/// into a confusion-like matrix, take 1 minus its trace-to-total ratio. The
/// zero matrix maps to the uniform ratio 1/K.
inline DifficultyScore criterion3_minmax(const std::vector<ItemConfusion>& taus,
                                         TaskKind task = TaskKind::multiclass) {
    DifficultyScore out;
    out.criterion = CriterionKind::c3_minmax;
    out.task = task;
    for (const auto& item : taus) {
        const Eigen::MatrixXd& t = item.tau;
        if (t.rows() != t.cols() || t.rows() < 1)
            throw DomainError("tau of item '" + item.item_id + "' is not square");
        double trace = 0.0, total = 0.0;
        for (int c = 0; c < t.rows(); ++c) {
            double mx = t.row(c).maxCoeff();
            double row_sum = 0.0;
            for (int k = 0; k < t.cols(); ++k) row_sum += std::exp(t(c, k) - mx);
            for (int k = 0; k < t.cols(); ++k) {
                const double norm = std::exp(t(c, k) - mx) / row_sum;
                total += norm;
                if (k == c) trace += norm;
            }
        }
        out.scores[item.item_id] = 1.0 - trace / total;
    }
    detail::check_finite_scores(out);
    return out;
}

/// Binary-task difficulty: each individual score is dichotomized against the
/// train-set median (at or above maps to the high class), then scored by vote
/// agreement like the categorical criterion.
inline DifficultyScore difficulty_for_binary(const AnnotationSet& ann, double train_median) {
    if (!ann.label_space().is_numeric())
        throw DomainError("binary dichotomization needs numeric (ordinal) labels");
    if (!std::isfinite(train_median)) throw DomainError("train median is not finite");
    DifficultyScore out;
    out.criterion = CriterionKind::c2_disagreement;
    out.task = TaskKind::binary;
    for (int i = 0; i < ann.num_items(); ++i) {
        std::vector<int> votes;
        for (const auto& e : ann.annotations_of(i))
            votes.push_back(e.value >= train_median ? 1 : 0);
        out.scores[ann.item_ids()[static_cast<std::size_t>(i)]] = detail::minority_ratio(votes, 2);
    }
    detail::check_finite_scores(out);
    return out;
}

} // namespace crowdcl

#endif

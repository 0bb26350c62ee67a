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

#ifndef CROWDCL_EXPERIMENT_HPP
#define CROWDCL_EXPERIMENT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "crowdcl/aggregate.hpp"
#include "crowdcl/core.hpp"
#include "crowdcl/curriculum.hpp"
#include "crowdcl/difficulty.hpp"
#include "crowdcl/error.hpp"
#include "crowdcl/metrics.hpp"
#include "crowdcl/net.hpp"

namespace crowdcl {

/// Training condition: the one-pass baseline, the random-bin control, or one
/// of the three difficulty criteria.
enum class Condition { none, random_bins, c1, c2, c3 };

inline const char* to_string(Condition c) {
    switch (c) {
        case Condition::none: return "none";
        case Condition::random_bins: return "random";
        case Condition::c1: return "c1";
        case Condition::c2: return "c2";
        case Condition::c3: return "c3";
    }
    return "?";
}

inline Condition condition_from_string(const std::string& s) {
    if (s == "none") return Condition::none;
    if (s == "random") return Condition::random_bins;
    if (s == "c1") return Condition::c1;
    if (s == "c2") return Condition::c2;
    if (s == "c3") return Condition::c3;
    throw DomainError("unknown condition '" + s + "' (expected none|random|c1|c2|c3)");
}

inline TaskKind task_from_string(const std::string& s) {
    if (s == "regression") return TaskKind::regression;
    if (s == "binary") return TaskKind::binary;
    if (s == "multiclass") return TaskKind::multiclass;
    throw DomainError("unknown task '" + s + "' (expected regression|binary|multiclass)");
}

/// Everything an experiment run can vary. Trial seeds are base_seed,
/// base_seed+1, ...; the auxiliary seeds keep the random-bin control and the
/// criterion-1 model reproducible and independent of the trial stream.
struct ExperimentPlan {
    TaskKind task = TaskKind::multiclass;
    int n_bins = 5;
    int epochs_per_stage = 50;
    int baseline_epochs = 100;
    double baseline_lr = 0.0005;
    std::vector<int> hidden = {1024, 1024};
    int batch_size = 128;
    int n_trials = 10;
    std::uint64_t base_seed = 1;
    std::vector<double> stage_rates; // empty = published five-bin default
    std::uint64_t random_bin_seed = 500009;
    std::uint64_t c1_model_seed = 977;
    MinmaxOptions minmax;

    std::vector<std::uint64_t> trial_seeds() const {
        if (n_trials < 1) throw DomainError("n_trials must be at least 1");
        std::vector<std::uint64_t> seeds;
        for (int t = 0; t < n_trials; ++t) seeds.push_back(base_seed + static_cast<std::uint64_t>(t));
        return seeds;
    }

    std::vector<double> rates_for_bins() const {
        if (!stage_rates.empty()) {
            if (stage_rates.size() != static_cast<std::size_t>(n_bins))
                throw DomainError("stage_rates length must equal n_bins");
            return stage_rates;
        }
        return default_stage_rates(n_bins);
    }
};

/// A task dataset plus the artifacts of its preparation: the annotation set
/// actually used for difficulty scoring, the binary split threshold, and the
/// no-agreement items removed from the multiclass pools. The feature matrix
/// passed to prepare_task must outlive this object.
struct PreparedData {
    AnnotationSet ann;
    TaskDataset ds;
    double train_median = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::string> dropped;

    explicit PreparedData(AnnotationSet a) : ann(std::move(a)) {}
};

namespace detail {

inline double median_of(std::vector<double> v) {
    if (v.empty()) throw DomainError("median of empty set");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline std::vector<std::string> without(const std::vector<std::string>& ids,
                                        const std::set<std::string>& drop) {
    std::vector<std::string> out;
    for (const auto& id : ids)
        if (drop.find(id) == drop.end()) out.push_back(id);
    return out;
}

} // namespace detail

/// Builds the learning problem for one task.
/// regression: targets are per-item mean scores. binary: mean scores
/// dichotomized at the train-pool median (the same threshold everywhere).
/// multiclass: majority-vote labels; items whose vote is tied are dropped
/// from every pool.
inline PreparedData prepare_task(TaskKind task, const AnnotationSet& ann,
                                 const FeatureMatrix& features, const DatasetSplit& split) {
    split.validate();
    PreparedData prep(ann);
    prep.ds.task = task;
    prep.ds.features = &features;
    prep.ds.train_ids = split.train;
    prep.ds.dev_ids = split.dev;
    prep.ds.test_ids = split.test;

    if (task == TaskKind::regression) {
        const ConsensusResult mean = aggregate_mean(ann);
        for (std::size_t i = 0; i < mean.item_ids.size(); ++i)
            prep.ds.reg_targets[mean.item_ids[i]] = mean.values[i];
    } else if (task == TaskKind::binary) {
        const ConsensusResult mean = aggregate_mean(ann);
        std::map<std::string, double> means;
        for (std::size_t i = 0; i < mean.item_ids.size(); ++i)
            means[mean.item_ids[i]] = mean.values[i];
        std::vector<double> train_means;
        for (const auto& id : split.train) {
            auto it = means.find(id);
            if (it == means.end()) throw DomainError("no annotations for train item '" + id + "'");
            train_means.push_back(it->second);
        }
        prep.train_median = detail::median_of(train_means);
        prep.ds.num_classes = 2;
        for (const auto& [id, m] : means)
            prep.ds.cls_targets[id] = m >= prep.train_median ? 1 : 0;
    } else {
        const ConsensusResult maj = aggregate_majority(ann, /*drop_ties=*/true);
        const std::set<std::string> dropped(maj.dropped_items.begin(), maj.dropped_items.end());
        prep.ds.num_classes = ann.label_space().num_classes();
        for (std::size_t i = 0; i < maj.item_ids.size(); ++i)
            if (dropped.find(maj.item_ids[i]) == dropped.end())
                prep.ds.cls_targets[maj.item_ids[i]] = maj.labels[i];
        prep.dropped.assign(dropped.begin(), dropped.end());
        prep.ds.train_ids = detail::without(prep.ds.train_ids, dropped);
        prep.ds.dev_ids = detail::without(prep.ds.dev_ids, dropped);
        prep.ds.test_ids = detail::without(prep.ds.test_ids, dropped);
    }
    prep.ds.validate();
    return prep;
}

/// Annotation set feeding the minmax solver for difficulty scoring. The
/// binary task dichotomizes every individual score at the train median; the
/// other tasks use the annotations as stored (ordinal scores act as discrete
/// levels).
inline AnnotationSet difficulty_annotations(const PreparedData& prep) {
    if (prep.ds.task != TaskKind::binary) return prep.ann;
    const LabelSpace bin_space = LabelSpace::categorical({"low", "high"});
    std::vector<AnnotationRecord> records;
    for (const auto& rec : prep.ann.records()) {
        records.push_back({prep.ann.item_ids()[static_cast<std::size_t>(rec.item)],
                           prep.ann.worker_ids()[static_cast<std::size_t>(rec.worker)],
                           rec.value >= prep.train_median ? 1.0 : 0.0});
    }
    return AnnotationSet(bin_space, records);
}

/// Model-error difficulty: trains the one-pass baseline on the full training
/// pool (fixed seed), evaluates it on that same pool, and scores items by
/// prediction error (regression) or signed confidence (classification).
inline DifficultyScore model_error_difficulty(const PreparedData& prep, const ExperimentPlan& plan) {
    // Same trajectory as one train_plain trial with seed c1_model_seed.
    NetworkConfig cfg = prep.ds.network_config(plan.hidden, plan.c1_model_seed);
    NetworkState st = init_network(cfg);
    auto [x, targets] = assemble(prep.ds, prep.ds.train_ids);
    train_epochs(st, x, targets, detail::stage_order_seed(plan.c1_model_seed, 1),
                 plan.baseline_epochs, plan.baseline_lr, plan.batch_size);
    const Eigen::MatrixXd out = forward(st, x);

    if (prep.ds.is_regression()) {
        std::map<std::string, double> truth, preds;
        for (std::size_t i = 0; i < prep.ds.train_ids.size(); ++i) {
            truth[prep.ds.train_ids[i]] = targets.values(static_cast<Eigen::Index>(i), 0);
            preds[prep.ds.train_ids[i]] = out(static_cast<Eigen::Index>(i), 0);
        }
        return criterion1_regression(truth, preds);
    }
    std::map<std::string, int> truth;
    std::map<std::string, Prediction> preds;
    for (std::size_t i = 0; i < prep.ds.train_ids.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        truth[prep.ds.train_ids[i]] = targets.classes[i];
        Eigen::Index arg = 0;
        const double conf = out.row(r).maxCoeff(&arg);
        preds[prep.ds.train_ids[i]] = {prep.ds.train_ids[i], 0.0, static_cast<int>(arg), conf};
    }
    return criterion1_classification(truth, preds, prep.ds.task);
}

/// Difficulty scores for one criterion over (at least) the training pool.
inline DifficultyScore compute_difficulty(Condition criterion, const PreparedData& prep,
                                          const ExperimentPlan& plan) {
    switch (criterion) {
        case Condition::c1:
            return model_error_difficulty(prep, plan);
        case Condition::c2:
            if (prep.ds.task == TaskKind::regression) return criterion2_regression(prep.ann);
            if (prep.ds.task == TaskKind::binary)
                return difficulty_for_binary(prep.ann, prep.train_median);
            return criterion2_categorical(prep.ann);
        case Condition::c3: {
            const AnnotationSet ann = difficulty_annotations(prep);
            const MinmaxResult mm = minmax_entropy(ann, plan.minmax);
            return criterion3_minmax(mm.items, prep.ds.task);
        }
        default:
            throw DomainError("condition has no difficulty criterion");
    }
}

// -------------------------------------------------------------------------
// Condition execution and reporting
// -------------------------------------------------------------------------

struct ConditionOutcome {
    std::string name;
    std::vector<double> rates; // per stage
    int epochs_per_stage = 0;
    std::vector<TrialResult> trials;

    std::vector<double> final_tests() const {
        std::vector<double> v;
        for (const auto& t : trials) v.push_back(t.final_test());
        return v;
    }
};

struct ExperimentReport {
    TaskKind task = TaskKind::multiclass;
    std::string metric_name; // "ccc" or "macro_f"
    std::vector<ConditionOutcome> conditions;

    const ConditionOutcome* find(const std::string& name) const {
        for (const auto& c : conditions)
            if (c.name == name) return &c;
        return nullptr;
    }
};

inline ConditionOutcome run_condition(Condition cond, const PreparedData& prep,
                                      const ExperimentPlan& plan) {
    ConditionOutcome out;
    out.name = to_string(cond);
    const NetworkConfig cfg = prep.ds.network_config(plan.hidden);
    if (cond == Condition::none) {
        out.rates = {plan.baseline_lr};
        out.epochs_per_stage = plan.baseline_epochs;
        out.trials = train_plain(prep.ds, cfg, plan.trial_seeds(), plan.baseline_epochs,
                                 plan.baseline_lr, plan.batch_size);
        return out;
    }
    CurriculumSchedule schedule;
    schedule.rates = plan.rates_for_bins();
    schedule.epochs_per_stage = plan.epochs_per_stage;
    if (cond == Condition::random_bins) {
        schedule.bins = make_random_bins(prep.ds.train_ids, plan.n_bins, plan.random_bin_seed);
    } else {
        const DifficultyScore scores = compute_difficulty(cond, prep, plan);
        schedule.bins = make_bins(scores, prep.ds.train_ids, plan.n_bins);
    }
    out.rates = schedule.rates;
    out.epochs_per_stage = schedule.epochs_per_stage;
    out.trials = train_curriculum(prep.ds, schedule, cfg, plan.trial_seeds(), plan.batch_size);
    return out;
}

inline ExperimentReport run_experiment(const PreparedData& prep, const ExperimentPlan& plan,
                                       const std::vector<Condition>& conditions) {
    if (conditions.empty()) throw DomainError("no conditions requested");
    ExperimentReport report;
    report.task = prep.ds.task;
    report.metric_name = prep.ds.is_regression() ? "ccc" : "macro_f";
    for (Condition c : conditions) report.conditions.push_back(run_condition(c, prep, plan));
    return report;
}

namespace detail {

inline double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double sample_sd(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

inline std::string utc_timestamp() {
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace detail

/// Report document. Deterministic for fixed inputs and seeds except the
/// `meta` object, which carries the timestamp.
inline nlohmann::json report_to_json(const ExperimentReport& report, bool with_meta = true) {
    nlohmann::json doc;
    doc["task"] = to_string(report.task);
    doc["metric"] = report.metric_name;
    const ConditionOutcome* none = report.find("none");
    const ConditionOutcome* random = report.find("random");

    nlohmann::json conds = nlohmann::json::array();
    for (const auto& cond : report.conditions) {
        nlohmann::json jc;
        jc["name"] = cond.name;
        jc["rates"] = cond.rates;
        jc["epochs_per_stage"] = cond.epochs_per_stage;
        const auto finals = cond.final_tests();
        jc["mean_test"] = detail::mean_of(finals);
        jc["sd_test"] = detail::sample_sd(finals);
        nlohmann::json trials = nlohmann::json::array();
        for (const auto& trial : cond.trials) {
            nlohmann::json jt;
            jt["seed"] = trial.seed;
            nlohmann::json stages = nlohmann::json::array();
            for (const auto& s : trial.stages) {
                stages.push_back({{"stage", s.stage},
                                  {"pool_size", s.pool_size},
                                  {"train_loss", s.train_loss},
                                  {"dev_metric", s.dev_metric},
                                  {"test_metric", s.test_metric}});
            }
            jt["stages"] = std::move(stages);
            trials.push_back(std::move(jt));
        }
        jc["trials"] = std::move(trials);
        auto attach = [&](const char* key, const ConditionOutcome* base) {
            if (base == nullptr || base->name == cond.name) return;
            const SignificanceResult sig = one_tailed_t_test(finals, base->final_tests());
            jc[key] = {{"t", sig.t_stat}, {"p", sig.p_value}, {"significant", sig.significant}};
        };
        attach("vs_none", none);
        attach("vs_random", random);
        conds.push_back(std::move(jc));
    }
    doc["conditions"] = std::move(conds);
    if (with_meta) doc["meta"] = {{"generated_at", detail::utc_timestamp()}, {"tool", "crowdcl"}};
    return doc;
}

/// Stage-wise learning-curve rows for every condition and trial.
inline std::string render_curve_csv(const ExperimentReport& report) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "condition,seed,stage,pool_size,train_loss,dev_metric,test_metric\n";
    for (const auto& cond : report.conditions)
        for (const auto& trial : cond.trials)
            for (const auto& s : trial.stages)
                os << cond.name << ',' << trial.seed << ',' << s.stage << ',' << s.pool_size << ','
                   << s.train_loss << ',' << s.dev_metric << ',' << s.test_metric << '\n';
    return os.str();
}

/// Summary table in Markdown. `*` marks a condition significantly above the
/// one-pass baseline, a degree sign marks one above the random control.
inline std::string render_table_md(const nlohmann::json& doc) {
    std::ostringstream os;
    os << "| condition | mean " << doc.at("metric").get<std::string>()
       << " | sd | p vs none | p vs random |\n";
    os << "|---|---|---|---|---|\n";
    auto fmt = [](double v) {
        std::ostringstream s;
        s << std::fixed << std::setprecision(4) << v;
        return s.str();
    };
    for (const auto& jc : doc.at("conditions")) {
        std::string markers;
        std::string p_none = "-", p_random = "-";
        if (jc.contains("vs_none")) {
            p_none = fmt(jc.at("vs_none").at("p").get<double>());
            if (jc.at("vs_none").at("significant").get<bool>()) markers += "*";
        }
        if (jc.contains("vs_random")) {
            p_random = fmt(jc.at("vs_random").at("p").get<double>());
            if (jc.at("vs_random").at("significant").get<bool>()) markers += "°";
        }
        os << "| " << jc.at("name").get<std::string>() << markers << " | "
           << fmt(jc.at("mean_test").get<double>()) << " | " << fmt(jc.at("sd_test").get<double>())
           << " | " << p_none << " | " << p_random << " |\n";
    }
    return os.str();
}

/// Summary rows in CSV, one per condition.
inline std::string render_summary_csv(const nlohmann::json& doc) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "condition,mean_test,sd_test,p_vs_none,p_vs_random,markers\n";
    for (const auto& jc : doc.at("conditions")) {
        std::string markers;
        os << jc.at("name").get<std::string>() << ',' << jc.at("mean_test").get<double>() << ','
           << jc.at("sd_test").get<double>() << ',';
        if (jc.contains("vs_none")) {
            os << jc.at("vs_none").at("p").get<double>();
            if (jc.at("vs_none").at("significant").get<bool>()) markers += "*";
        }
        os << ',';
        if (jc.contains("vs_random")) {
            os << jc.at("vs_random").at("p").get<double>();
            if (jc.at("vs_random").at("significant").get<bool>()) markers += "°";
        }
        os << ',' << markers << '\n';
    }
    return os.str();
}

} // namespace crowdcl

#endif

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

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "crowdcl/crowdcl.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

crowdcl::LabelSpace label_space_from(const std::string& classes_csv, int levels) {
    if (!classes_csv.empty() && levels > 0)
        throw CLI::ValidationError("--classes and --levels are mutually exclusive");
    if (!classes_csv.empty()) {
        std::vector<std::string> names;
        std::stringstream ss(classes_csv);
        std::string tok;
        while (std::getline(ss, tok, ',')) names.push_back(tok);
        return crowdcl::LabelSpace::categorical(names);
    }
    if (levels > 0) return crowdcl::LabelSpace::ordinal(levels);
    throw CLI::ValidationError("one of --classes or --levels is required");
}

std::vector<int> parse_hidden(const std::string& csv) {
    std::vector<int> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
    if (out.empty()) throw CLI::ValidationError("--hidden must list at least one layer size");
    return out;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw crowdcl::Error("cannot open '" + path.string() + "' for writing");
    os << text;
    if (!os) throw crowdcl::Error("failed writing '" + path.string() + "'");
}

void write_json(const fs::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

json label_space_to_json(const crowdcl::LabelSpace& space) {
    if (space.kind() == crowdcl::LabelKind::categorical)
        return {{"kind", "categorical"}, {"classes", space.class_names()}};
    return {{"kind", "ordinal"}, {"levels", space.num_levels()}};
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    std::string preset;
    std::string kind = "categorical";
    int items = 200;
    int workers = 10;
    int labels_per_item = 5;
    std::string classes = "c0,c1,c2,c3";
    int levels = 7;
    int feature_dim = 8;
    double ability_mean = 1.0;
    double ability_sd = 1.0;
    double noise_scale = 1.0;
    std::uint64_t seed = 1;
    std::string out = ".";
    double train_frac = 0.6, dev_frac = 0.2, test_frac = 0.2;
};

void apply_preset(CLI::App* cmd, SimulateArgs& a) {
    if (a.preset.empty()) return;
    SimulateArgs p;
    if (a.preset == "categorical-small") {
        p.kind = "categorical"; p.items = 200; p.workers = 10; p.classes = "c0,c1,c2,c3";
        p.feature_dim = 8;
    } else if (a.preset == "categorical-large") {
        p.kind = "categorical"; p.items = 3000; p.workers = 50; p.classes = "c0,c1,c2,c3,c4";
        p.feature_dim = 64;
    } else if (a.preset == "ordinal-small") {
        p.kind = "ordinal"; p.items = 200; p.workers = 10; p.levels = 7; p.feature_dim = 8;
    } else if (a.preset == "ordinal-large") {
        p.kind = "ordinal"; p.items = 3000; p.workers = 50; p.levels = 7; p.feature_dim = 64;
    } else {
        throw CLI::ValidationError("unknown preset '" + a.preset + "'");
    }
    auto keep = [&](const char* flag) { return cmd->count(flag) > 0; };
    if (!keep("--kind")) a.kind = p.kind;
    if (!keep("--items")) a.items = p.items;
    if (!keep("--workers")) a.workers = p.workers;
    if (!keep("--classes")) a.classes = p.classes;
    if (!keep("--levels")) a.levels = p.levels;
    if (!keep("--feature-dim")) a.feature_dim = p.feature_dim;
}

void cmd_simulate(CLI::App* cmd, const SimulateArgs& args_in) {
    SimulateArgs args = args_in;
    apply_preset(cmd, args);
    if (args.labels_per_item > args.workers)
        throw CLI::ValidationError("--labels-per-item cannot exceed --workers");
    if (args.kind != "categorical" && args.kind != "ordinal")
        throw CLI::ValidationError("--kind must be categorical or ordinal");

    crowdcl::SimConfig cfg;
    cfg.n_items = args.items;
    cfg.n_workers = args.workers;
    cfg.labels_per_item = args.labels_per_item;
    cfg.feature_dim = args.feature_dim;
    cfg.ability_mean = args.ability_mean;
    cfg.ability_sd = args.ability_sd;
    cfg.noise_scale = args.noise_scale;
    cfg.seed = args.seed;
    cfg.label_space = args.kind == "categorical"
                          ? label_space_from(args.classes, 0)
                          : label_space_from("", args.levels);

    auto [ann, features, truth] = args.kind == "categorical" ? crowdcl::simulate_categorical(cfg)
                                                             : crowdcl::simulate_ordinal(cfg);
    fs::create_directories(args.out);
    const fs::path dir(args.out);
    crowdcl::save_annotations((dir / "annotations.csv").string(), ann);
    crowdcl::save_features_csv((dir / "features.csv").string(), features);
    crowdcl::SplitFractions fractions{args.train_frac, args.dev_frac, args.test_frac};
    const crowdcl::DatasetSplit split =
        crowdcl::random_split(features.item_ids(), fractions, cfg.seed + 1);
    crowdcl::save_split((dir / "split.json").string(), split);
    crowdcl::save_truth(truth, (dir / "truth.json").string());
    write_json(dir / "dataset.json", {{"label_space", label_space_to_json(cfg.label_space)},
                                      {"feature_dim", cfg.feature_dim},
                                      {"n_items", cfg.n_items},
                                      {"n_workers", cfg.n_workers},
                                      {"labels_per_item", cfg.labels_per_item},
                                      {"seed", cfg.seed}});
    std::cout << "wrote " << ann.num_records() << " annotations for " << ann.num_items()
              << " items to " << dir.string() << "\n";
}

// ---------------------------------------------------------------- aggregate

struct AggregateArgs {
    std::string annotations;
    std::string method = "majority";
    std::string classes;
    int levels = 0;
    bool drop_ties = false;
    std::string out = ".";
    int ds_max_iter = 100;
    double ds_tol = 1e-8;
    double mm_alpha = 0.25, mm_beta = 0.25, mm_tol = 1e-6;
    int mm_outer = 50, mm_inner = 20;
};

void write_consensus_csv(const fs::path& path, const crowdcl::ConsensusResult& res) {
    const std::set<std::string> dropped(res.dropped_items.begin(), res.dropped_items.end());
    std::ostringstream os;
    os << std::setprecision(17);
    const bool probabilistic = res.posterior.size() > 0;
    os << "item_id,label";
    for (Eigen::Index c = 0; probabilistic && c < res.posterior.cols(); ++c) os << ",q_" << c;
    os << '\n';
    for (std::size_t i = 0; i < res.item_ids.size(); ++i) {
        if (dropped.count(res.item_ids[i])) continue;
        os << res.item_ids[i] << ',';
        if (res.method == crowdcl::ConsensusMethod::mean)
            os << res.values[i];
        else
            os << res.labels[i];
        for (Eigen::Index c = 0; probabilistic && c < res.posterior.cols(); ++c)
            os << ',' << res.posterior(static_cast<Eigen::Index>(i), c);
        os << '\n';
    }
    write_text(path, os.str());
}

void cmd_aggregate(const AggregateArgs& args) {
    const crowdcl::LabelSpace space = label_space_from(args.classes, args.levels);
    const crowdcl::AnnotationSet ann = crowdcl::load_annotations(args.annotations, space);
    fs::create_directories(args.out);
    const fs::path dir(args.out);

    if (args.method == "mean") {
        write_consensus_csv(dir / "consensus.csv", crowdcl::aggregate_mean(ann));
    } else if (args.method == "majority") {
        const auto res = crowdcl::aggregate_majority(ann, args.drop_ties);
        write_consensus_csv(dir / "consensus.csv", res);
        if (args.drop_ties) {
            std::ostringstream os;
            os << "item_id\n";
            for (const auto& id : res.dropped_items) os << id << '\n';
            write_text(dir / "dropped.csv", os.str());
        }
    } else if (args.method == "ds") {
        crowdcl::DawidSkeneOptions opt;
        opt.max_iter = args.ds_max_iter;
        opt.tol = args.ds_tol;
        const auto [res, workers] = crowdcl::dawid_skene(ann, opt);
        write_consensus_csv(dir / "consensus.csv", res);
        json jw = json::object();
        for (std::size_t j = 0; j < workers.worker_ids.size(); ++j)
            jw[workers.worker_ids[j]] = {{"confusion", matrix_to_json(workers.confusion[j])}};
        write_json(dir / "worker_model.json", {{"method", "ds"}, {"workers", jw}});
    } else if (args.method == "minmax") {
        crowdcl::MinmaxOptions opt;
        opt.alpha = args.mm_alpha;
        opt.beta = args.mm_beta;
        opt.outer_iters = args.mm_outer;
        opt.inner_iters = args.mm_inner;
        opt.tol = args.mm_tol;
        const crowdcl::MinmaxResult res = crowdcl::minmax_entropy(ann, opt);
        write_consensus_csv(dir / "consensus.csv", res.consensus);
        json jw = json::object();
        for (std::size_t j = 0; j < res.workers.worker_ids.size(); ++j)
            jw[res.workers.worker_ids[j]] = {{"sigma", matrix_to_json(res.workers.sigma[j])}};
        write_json(dir / "worker_model.json", {{"method", "minmax"}, {"workers", jw}});
        json jt = json::object();
        for (const auto& item : res.items) jt[item.item_id] = matrix_to_json(item.tau);
        write_json(dir / "tau.json", {{"items", jt}});
    } else {
        throw CLI::ValidationError("--method must be mean, majority, ds, or minmax");
    }
    std::cout << "wrote consensus for " << ann.num_items() << " items to " << dir.string() << "\n";
}

// ---------------------------------------------------------------- shared experiment loading

struct DataArgs {
    std::string annotations, features, split;
    std::string classes;
    int levels = 0;
};

struct NetArgs {
    std::string hidden = "1024,1024";
    int batch_size = 128;
    int baseline_epochs = 100;
    double baseline_lr = 0.0005;
};

crowdcl::TaskKind parse_task(const std::string& s) {
    try {
        return crowdcl::task_from_string(s);
    } catch (const crowdcl::DomainError& e) {
        throw CLI::ValidationError(e.what());
    }
}

// ---------------------------------------------------------------- difficulty

struct DifficultyArgs {
    DataArgs data;
    NetArgs net;
    std::string criterion = "c2";
    std::string task = "multiclass";
    std::uint64_t c1_seed = 977;
    double mm_alpha = 0.25, mm_beta = 0.25;
    std::string out = ".";
};

void write_difficulty_csv(const fs::path& path, const crowdcl::DifficultyScore& scores) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "item_id,criterion,task,score\n";
    for (const auto& [id, d] : scores.scores)
        os << id << ',' << crowdcl::to_string(scores.criterion) << ','
           << crowdcl::to_string(scores.task) << ',' << d << '\n';
    write_text(path, os.str());
}

void cmd_difficulty(const DifficultyArgs& args) {
    const crowdcl::TaskKind task = parse_task(args.task);
    const bool needs_model = args.criterion == "c1";
    const bool needs_split = needs_model || task == crowdcl::TaskKind::binary;
    if (needs_model && args.data.features.empty())
        throw CLI::ValidationError("--criterion c1 requires --features (a model is trained)");
    if (needs_split && args.data.split.empty())
        throw CLI::ValidationError("this criterion/task needs --split");

    const crowdcl::LabelSpace space = label_space_from(args.data.classes, args.data.levels);
    const crowdcl::AnnotationSet ann = crowdcl::load_annotations(args.data.annotations, space);

    crowdcl::DifficultyScore scores;
    if (needs_model) {
        const crowdcl::FeatureMatrix features = crowdcl::load_features(args.data.features);
        const crowdcl::DatasetSplit split = crowdcl::load_split(args.data.split);
        const crowdcl::PreparedData prep = crowdcl::prepare_task(task, ann, features, split);
        crowdcl::ExperimentPlan plan;
        plan.task = task;
        plan.hidden = parse_hidden(args.net.hidden);
        plan.batch_size = args.net.batch_size;
        plan.baseline_epochs = args.net.baseline_epochs;
        plan.baseline_lr = args.net.baseline_lr;
        plan.c1_model_seed = args.c1_seed;
        scores = crowdcl::model_error_difficulty(prep, plan);
    } else {
        double train_median = std::numeric_limits<double>::quiet_NaN();
        if (task == crowdcl::TaskKind::binary) {
            const crowdcl::DatasetSplit split = crowdcl::load_split(args.data.split);
            const crowdcl::ConsensusResult mean = crowdcl::aggregate_mean(ann);
            std::map<std::string, double> means;
            for (std::size_t i = 0; i < mean.item_ids.size(); ++i)
                means[mean.item_ids[i]] = mean.values[i];
            std::vector<double> train_means;
            for (const auto& id : split.train) train_means.push_back(means.at(id));
            std::sort(train_means.begin(), train_means.end());
            const std::size_t n = train_means.size();
            train_median = n % 2 == 1 ? train_means[n / 2]
                                      : 0.5 * (train_means[n / 2 - 1] + train_means[n / 2]);
        }
        if (args.criterion == "c2") {
            if (task == crowdcl::TaskKind::regression)
                scores = crowdcl::criterion2_regression(ann);
            else if (task == crowdcl::TaskKind::binary)
                scores = crowdcl::difficulty_for_binary(ann, train_median);
            else
                scores = crowdcl::criterion2_categorical(ann);
        } else if (args.criterion == "c3") {
            crowdcl::MinmaxOptions opt;
            opt.alpha = args.mm_alpha;
            opt.beta = args.mm_beta;
            crowdcl::AnnotationSet source = ann;
            if (task == crowdcl::TaskKind::binary) {
                const crowdcl::LabelSpace bin_space =
                    crowdcl::LabelSpace::categorical({"low", "high"});
                std::vector<crowdcl::AnnotationRecord> records;
                for (const auto& rec : ann.records())
                    records.push_back({ann.item_ids()[static_cast<std::size_t>(rec.item)],
                                       ann.worker_ids()[static_cast<std::size_t>(rec.worker)],
                                       rec.value >= train_median ? 1.0 : 0.0});
                source = crowdcl::AnnotationSet(bin_space, records);
            }
            const crowdcl::MinmaxResult mm = crowdcl::minmax_entropy(source, opt);
            scores = crowdcl::criterion3_minmax(mm.items, task);
        } else {
            throw CLI::ValidationError("--criterion must be c1, c2, or c3");
        }
    }
    fs::create_directories(args.out);
    write_difficulty_csv(fs::path(args.out) / "difficulty.csv", scores);
    std::cout << "wrote " << scores.scores.size() << " difficulty scores to " << args.out << "\n";
}

// ---------------------------------------------------------------- plan

struct PlanArgs {
    DataArgs data;
    NetArgs net;
    std::string criterion = "c2";
    std::string task = "multiclass";
    int bins = 5;
    int epochs_per_stage = 50;
    bool search = false;
    std::uint64_t search_seed = 271828;
    std::uint64_t random_bin_seed = 500009;
    std::uint64_t c1_seed = 977;
    std::string out = ".";
};

void cmd_plan(const PlanArgs& args) {
    const crowdcl::TaskKind task = parse_task(args.task);
    const crowdcl::LabelSpace space = label_space_from(args.data.classes, args.data.levels);
    const crowdcl::AnnotationSet ann = crowdcl::load_annotations(args.data.annotations, space);
    const crowdcl::FeatureMatrix features = crowdcl::load_features(args.data.features);
    const crowdcl::DatasetSplit split = crowdcl::load_split(args.data.split);
    const crowdcl::PreparedData prep = crowdcl::prepare_task(task, ann, features, split);

    crowdcl::ExperimentPlan plan;
    plan.task = task;
    plan.n_bins = args.bins;
    plan.epochs_per_stage = args.epochs_per_stage;
    plan.hidden = parse_hidden(args.net.hidden);
    plan.batch_size = args.net.batch_size;
    plan.baseline_epochs = args.net.baseline_epochs;
    plan.baseline_lr = args.net.baseline_lr;
    plan.c1_model_seed = args.c1_seed;

    std::vector<std::vector<std::string>> bins;
    if (args.criterion == "random") {
        bins = crowdcl::make_random_bins(prep.ds.train_ids, args.bins, args.random_bin_seed);
    } else {
        const crowdcl::Condition crit = crowdcl::condition_from_string(args.criterion);
        if (crit == crowdcl::Condition::none)
            throw CLI::ValidationError("plan needs a criterion (random, c1, c2, or c3)");
        const crowdcl::DifficultyScore scores = crowdcl::compute_difficulty(crit, prep, plan);
        bins = crowdcl::make_bins(scores, prep.ds.train_ids, args.bins);
    }

    std::vector<double> rates;
    if (args.search) {
        const crowdcl::NetworkConfig cfg = prep.ds.network_config(plan.hidden);
        rates = crowdcl::greedy_lr_search(prep.ds, bins, crowdcl::LrGrid{}, cfg,
                                          args.epochs_per_stage, args.search_seed,
                                          plan.batch_size);
    } else {
        rates = crowdcl::default_stage_rates(args.bins);
    }

    fs::create_directories(args.out);
    write_json(fs::path(args.out) / "schedule.json",
               {{"bins", bins}, {"rates", rates}, {"epochs_per_stage", args.epochs_per_stage}});
    std::cout << "wrote schedule with " << bins.size() << " bins to " << args.out << "\n";
}

// ---------------------------------------------------------------- run

struct RunArgs {
    DataArgs data;
    NetArgs net;
    std::string task = "multiclass";
    std::string criterion = "c3";
    bool with_baselines = false;
    int bins = 5;
    int epochs_per_stage = 50;
    int trials = 10;
    std::uint64_t seed = 1;
    std::uint64_t random_bin_seed = 500009;
    std::uint64_t c1_seed = 977;
    int jobs = 1;
    std::string out = ".";
};

void cmd_run(const RunArgs& args) {
    const crowdcl::TaskKind task = parse_task(args.task);
    const crowdcl::LabelSpace space = label_space_from(args.data.classes, args.data.levels);
    const crowdcl::AnnotationSet ann = crowdcl::load_annotations(args.data.annotations, space);
    const crowdcl::FeatureMatrix features = crowdcl::load_features(args.data.features);
    const crowdcl::DatasetSplit split = crowdcl::load_split(args.data.split);
    const crowdcl::PreparedData prep = crowdcl::prepare_task(task, ann, features, split);

    crowdcl::ExperimentPlan plan;
    plan.task = task;
    plan.n_bins = args.bins;
    plan.epochs_per_stage = args.epochs_per_stage;
    plan.hidden = parse_hidden(args.net.hidden);
    plan.batch_size = args.net.batch_size;
    plan.baseline_epochs = args.net.baseline_epochs;
    plan.baseline_lr = args.net.baseline_lr;
    plan.n_trials = args.trials;
    plan.base_seed = args.seed;
    plan.random_bin_seed = args.random_bin_seed;
    plan.c1_model_seed = args.c1_seed;

    const crowdcl::Condition requested = crowdcl::condition_from_string(args.criterion);
    std::vector<crowdcl::Condition> conditions;
    if (args.with_baselines) {
        conditions.push_back(crowdcl::Condition::none);
        if (requested != crowdcl::Condition::none && requested != crowdcl::Condition::random_bins)
            conditions.push_back(crowdcl::Condition::random_bins);
    }
    if (std::find(conditions.begin(), conditions.end(), requested) == conditions.end())
        conditions.push_back(requested);

    const crowdcl::ExperimentReport report = crowdcl::run_experiment(prep, plan, conditions);

    fs::create_directories(args.out);
    const fs::path dir(args.out);
    const json doc = crowdcl::report_to_json(report, /*with_meta=*/true);
    write_json(dir / "report.json", doc);
    write_text(dir / "curve.csv", crowdcl::render_curve_csv(report));
    write_text(dir / "table.md", crowdcl::render_table_md(doc));
    std::cout << crowdcl::render_table_md(doc);
    std::cout << "wrote report to " << dir.string() << "\n";
}

// ---------------------------------------------------------------- report

struct ReportArgs {
    std::string report = "report.json";
    std::string format = "md";
    std::string out;
};

void cmd_report(const ReportArgs& args) {
    std::ifstream is(args.report);
    if (!is) throw crowdcl::Error("cannot open '" + args.report + "' for reading");
    json doc;
    try {
        is >> doc;
    } catch (const json::exception& e) {
        throw crowdcl::ParseError(std::string("invalid report: ") + e.what());
    }
    std::string text;
    if (args.format == "md")
        text = crowdcl::render_table_md(doc);
    else if (args.format == "csv")
        text = crowdcl::render_summary_csv(doc);
    else
        throw CLI::ValidationError("--format must be md or csv");
    if (args.out.empty())
        std::cout << text;
    else
        write_text(args.out, text);
}

void add_data_options(CLI::App* cmd, DataArgs& data, bool features_required) {
    cmd->add_option("--annotations", data.annotations, "annotation CSV")->required();
    cmd->add_option("--features", data.features, "feature matrix (CSV or binary)")
        ->required(features_required);
    cmd->add_option("--split", data.split, "split JSON")->required(features_required);
    cmd->add_option("--classes", data.classes, "comma-separated class names (categorical labels)");
    cmd->add_option("--levels", data.levels, "number of ordinal levels");
}

void add_net_options(CLI::App* cmd, NetArgs& net) {
    cmd->add_option("--hidden", net.hidden, "hidden layer sizes, comma-separated");
    cmd->add_option("--batch-size", net.batch_size, "mini-batch size");
    cmd->add_option("--baseline-epochs", net.baseline_epochs, "epochs for the one-pass baseline");
    cmd->add_option("--baseline-lr", net.baseline_lr, "learning rate for the one-pass baseline");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"crowd-label aggregation, difficulty scoring, and curriculum training"};
    app.require_subcommand(1);

    SimulateArgs sim;
    CLI::App* c_sim = app.add_subcommand("simulate", "generate a synthetic dataset");
    c_sim->add_option("--preset", sim.preset,
                      "categorical-small|categorical-large|ordinal-small|ordinal-large");
    c_sim->add_option("--kind", sim.kind, "categorical or ordinal");
    c_sim->add_option("--items", sim.items, "number of items");
    c_sim->add_option("--workers", sim.workers, "number of workers");
    c_sim->add_option("--labels-per-item", sim.labels_per_item, "annotations per item");
    c_sim->add_option("--classes", sim.classes, "class names (categorical)");
    c_sim->add_option("--levels", sim.levels, "ordinal levels");
    c_sim->add_option("--feature-dim", sim.feature_dim, "feature dimensionality");
    c_sim->add_option("--ability-mean", sim.ability_mean, "worker ability mean");
    c_sim->add_option("--ability-sd", sim.ability_sd, "worker ability standard deviation");
    c_sim->add_option("--noise-scale", sim.noise_scale, "label/feature noise scale");
    c_sim->add_option("--seed", sim.seed, "random seed");
    c_sim->add_option("--out", sim.out, "output directory");
    c_sim->add_option("--train-frac", sim.train_frac, "train fraction");
    c_sim->add_option("--dev-frac", sim.dev_frac, "dev fraction");
    c_sim->add_option("--test-frac", sim.test_frac, "test fraction");
    c_sim->callback([&] { cmd_simulate(c_sim, sim); });

    AggregateArgs agg;
    CLI::App* c_agg = app.add_subcommand("aggregate", "aggregate crowd labels into consensus");
    c_agg->add_option("--annotations", agg.annotations, "annotation CSV")->required();
    c_agg->add_option("--method", agg.method, "mean|majority|ds|minmax");
    c_agg->add_option("--classes", agg.classes, "class names (categorical)");
    c_agg->add_option("--levels", agg.levels, "ordinal levels");
    c_agg->add_flag("--drop-ties", agg.drop_ties, "drop tied majority votes");
    c_agg->add_option("--out", agg.out, "output directory");
    c_agg->add_option("--ds-max-iter", agg.ds_max_iter, "EM iteration cap");
    c_agg->add_option("--ds-tol", agg.ds_tol, "EM stopping tolerance");
    c_agg->add_option("--mm-alpha", agg.mm_alpha, "worker regularizer weight");
    c_agg->add_option("--mm-beta", agg.mm_beta, "item regularizer weight");
    c_agg->add_option("--mm-outer", agg.mm_outer, "outer iteration cap");
    c_agg->add_option("--mm-inner", agg.mm_inner, "inner ascent steps");
    c_agg->add_option("--mm-tol", agg.mm_tol, "posterior stopping tolerance");
    c_agg->callback([&] { cmd_aggregate(agg); });

    DifficultyArgs dif;
    CLI::App* c_dif = app.add_subcommand("difficulty", "score per-item difficulty");
    add_data_options(c_dif, dif.data, /*features_required=*/false);
    add_net_options(c_dif, dif.net);
    c_dif->add_option("--criterion", dif.criterion, "c1|c2|c3");
    c_dif->add_option("--task", dif.task, "regression|binary|multiclass");
    c_dif->add_option("--c1-seed", dif.c1_seed, "seed of the pre-trained model");
    c_dif->add_option("--mm-alpha", dif.mm_alpha, "worker regularizer weight");
    c_dif->add_option("--mm-beta", dif.mm_beta, "item regularizer weight");
    c_dif->add_option("--out", dif.out, "output directory");
    c_dif->callback([&] { cmd_difficulty(dif); });

    PlanArgs pl;
    CLI::App* c_plan = app.add_subcommand("plan", "build bins and a learning-rate schedule");
    add_data_options(c_plan, pl.data, /*features_required=*/true);
    add_net_options(c_plan, pl.net);
    c_plan->add_option("--criterion", pl.criterion, "random|c1|c2|c3");
    c_plan->add_option("--task", pl.task, "regression|binary|multiclass");
    c_plan->add_option("--bins", pl.bins, "number of difficulty bins");
    c_plan->add_option("--epochs-per-stage", pl.epochs_per_stage, "epochs per curriculum stage");
    c_plan->add_flag("--search", pl.search, "run the greedy per-bin learning-rate search");
    c_plan->add_option("--search-seed", pl.search_seed, "seed of the search network");
    c_plan->add_option("--random-bin-seed", pl.random_bin_seed, "seed for random bins");
    c_plan->add_option("--c1-seed", pl.c1_seed, "seed of the pre-trained model");
    c_plan->add_option("--out", pl.out, "output directory");
    c_plan->callback([&] { cmd_plan(pl); });

    RunArgs run;
    CLI::App* c_run = app.add_subcommand("run", "train and evaluate one or more conditions");
    add_data_options(c_run, run.data, /*features_required=*/true);
    add_net_options(c_run, run.net);
    c_run->add_option("--task", run.task, "regression|binary|multiclass");
    c_run->add_option("--criterion", run.criterion, "none|random|c1|c2|c3");
    c_run->add_flag("--with-baselines", run.with_baselines,
                    "also run the one-pass baseline and random-bin control");
    c_run->add_option("--bins", run.bins, "number of difficulty bins");
    c_run->add_option("--epochs-per-stage", run.epochs_per_stage, "epochs per curriculum stage");
    c_run->add_option("--trials", run.trials, "number of trials (seeds)");
    c_run->add_option("--seed", run.seed, "base trial seed");
    c_run->add_option("--random-bin-seed", run.random_bin_seed, "seed for random bins");
    c_run->add_option("--c1-seed", run.c1_seed, "seed of the pre-trained model");
    c_run->add_option("--jobs", run.jobs, "trial parallelism (reserved, currently serial)");
    c_run->add_option("--out", run.out, "output directory");
    c_run->callback([&] { cmd_run(run); });

    ReportArgs rep;
    CLI::App* c_rep = app.add_subcommand("report", "re-render a report file");
    c_rep->add_option("--report", rep.report, "report.json path")->required();
    c_rep->add_option("--format", rep.format, "md or csv");
    c_rep->add_option("--out", rep.out, "output file (default stdout)");
    c_rep->callback([&] { cmd_report(rep); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const crowdcl::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

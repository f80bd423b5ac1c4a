#include "tnr/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "tnr/format.hpp"
#include "tnr/rng.hpp"

namespace tnr {

namespace {

using nlohmann::json;

constexpr std::uint64_t kFoldStream = 0xF01D;
constexpr std::uint64_t kReducerStream = 0x2ED0;
constexpr std::uint64_t kRegressorStream = 0x2E62;

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace

double r2_score(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred) {
    if (y_true.size() != y_pred.size()) {
        throw Error(ErrorCode::ShapeMismatch,
                    std::to_string(y_true.size()) + " true vs " + std::to_string(y_pred.size()) + " predicted");
    }
    if (y_true.size() < 2) {
        throw Error(ErrorCode::DegenerateTarget, "need at least 2 samples for R^2");
    }
    const double mean = y_true.mean();
    const double ss_tot = (y_true.array() - mean).square().sum();
    if (ss_tot == 0.0) {
        throw Error(ErrorCode::DegenerateTarget, "y_true has zero variance");
    }
    const double ss_res = (y_true - y_pred).squaredNorm();
    return 1.0 - ss_res / ss_tot;
}

const char* regressor_kind_name(RegressorKind kind) {
    return kind == RegressorKind::Svr ? "svr" : "gbm";
}

RegressorKind regressor_kind_from_name(const std::string& name) {
    if (name == "svr") return RegressorKind::Svr;
    if (name == "gbm") return RegressorKind::Gbm;
    throw Error(ErrorCode::InvalidConfig, "unknown regressor kind '" + name + "'");
}

std::string ReducerSpec::signature() const {
    std::ostringstream os;
    os << std::setprecision(17);
    os << reducer_kind_name(kind) << ":dims=" << dims;
    switch (kind) {
        case ReducerKind::Tnn:
            os << ":dp=" << mining.delta_p << ":dn=" << mining.delta_n << ":margin=" << tnn.margin
               << ":lr=" << tnn.learning_rate << ":tpr=" << tnn.triplets_per_round
               << ":epr=" << tnn.epochs_per_round << ":rounds=" << tnn.rounds << ":batch=" << tnn.batch_size;
            break;
        case ReducerKind::Ae:
            os << ":epochs=" << ae.epochs << ":lr=" << ae.learning_rate << ":batch=" << ae.batch_size;
            break;
        case ReducerKind::Rp:
            os << ":seed=" << rp_seed;
            break;
        case ReducerKind::Pca:
            break;
    }
    return os.str();
}

std::string CellSpec::label() const {
    std::string regressor_part = regressor == RegressorKind::Svr ? "SVR" : "GBM";
    if (!reducer) {
        return regressor_part + " (original features)";
    }
    std::string reducer_part;
    switch (reducer->kind) {
        case ReducerKind::Tnn: reducer_part = "TNN"; break;
        case ReducerKind::Pca: reducer_part = "PCA"; break;
        case ReducerKind::Rp: reducer_part = "RP"; break;
        case ReducerKind::Ae: reducer_part = "AE"; break;
    }
    return reducer_part + "-" + regressor_part + " (" + std::to_string(reducer->dims) + " features)";
}

bool ExperimentReport::any_failed() const {
    for (const auto& cell : cells) {
        for (const auto& result : cell.per_target) {
            if (result.failed()) return true;
        }
    }
    return false;
}

const CellTargetResult& ExperimentReport::result(const std::string& label, Target target) const {
    for (const auto& cell : cells) {
        if (cell.label != label) continue;
        for (std::size_t t = 0; t < targets.size(); ++t) {
            if (targets[t] == target) return cell.per_target[t];
        }
    }
    throw Error(ErrorCode::InvalidConfig, "no report cell '" + label + "' for target");
}

Reducer fit_reducer_stage(const FeatureMatrix& standardized_train, const Eigen::VectorXd& train_labels,
                          const ReducerSpec& spec, std::uint64_t seed, const ProgressFn& progress) {
    switch (spec.kind) {
        case ReducerKind::Pca:
            return Reducer::pca(fit_pca(standardized_train.values, spec.dims));
        case ReducerKind::Rp:
            return Reducer::random_projection(
                fit_random_projection(standardized_train.cols(), spec.dims, spec.rp_seed));
        case ReducerKind::Tnn: {
            TnnTrainConfig config = spec.tnn;
            config.embedding_dim = spec.dims;
            config.seed = seed;
            return Reducer::triplet_network(
                train_tnn(standardized_train, train_labels, spec.mining, config, progress));
        }
        case ReducerKind::Ae: {
            AeTrainConfig config = spec.ae;
            config.embedding_dim = spec.dims;
            config.seed = seed;
            return Reducer::autoencoder(train_autoencoder(standardized_train, config, progress));
        }
    }
    throw Error(ErrorCode::InvalidConfig, "unreachable reducer kind");
}

Eigen::VectorXd FittedPipeline::predict(const Eigen::MatrixXd& raw_feature_values) const {
    Eigen::MatrixXd X = standardizer.apply(raw_feature_values);
    if (reducer) {
        X = reducer->transform(X);
    }
    if (const auto* svr = std::get_if<SvrModel>(&regressor)) {
        return predict_svr(*svr, X);
    }
    return predict_gbm(std::get<GbmModel>(regressor), X);
}

FittedPipeline fit_cell_pipeline(const FeatureMatrix& train_features, const Eigen::VectorXd& train_labels,
                                 const CellSpec& cell, std::uint64_t reducer_seed,
                                 std::uint64_t regressor_seed) {
    FittedPipeline pipeline;
    pipeline.standardizer = Standardizer::fit(train_features);
    FeatureMatrix standardized = pipeline.standardizer.apply(train_features);

    Eigen::MatrixXd Z = standardized.values;
    if (cell.reducer) {
        pipeline.reducer = fit_reducer_stage(standardized, train_labels, *cell.reducer, reducer_seed);
        Z = pipeline.reducer->transform(Z);
    }
    if (cell.regressor == RegressorKind::Svr) {
        pipeline.regressor = fit_svr(Z, train_labels, cell.svr);
    } else {
        GbmConfig config = cell.gbm;
        config.seed = regressor_seed;
        pipeline.regressor = fit_gbm(Z, train_labels, config);
    }
    return pipeline;
}

namespace {

struct ReducerGroup {
    std::optional<ReducerSpec> spec;
    std::uint64_t spec_hash = 0;
    std::vector<std::size_t> cell_indices;
};

struct FoldSlot {
    double r2 = 0.0;
    Eigen::Index test_count = 0;
    std::string error;
};

}  // namespace

ExperimentReport run_experiment(const FeatureMatrix& features, const AnnotationTable& annotations,
                                const ExperimentConfig& config, const ExperimentProgressFn& progress) {
    if (config.cells.empty()) {
        throw Error(ErrorCode::InvalidConfig, "experiment has no cells");
    }
    if (config.targets.empty()) {
        throw Error(ErrorCode::InvalidConfig, "experiment has no targets");
    }

    const AnnotationTable aligned = align_annotations(features, annotations);
    const AnnotationTable normalized = aligned.normalized ? aligned : normalize_labels(aligned);
    const FoldAssignment folds = kfold_split(features.rows(), config.k_folds, mix_seed(config.seed, kFoldStream));

    // Cells with an identical reducer spec share the fitted reducer per
    // (target, fold), mirroring one embedding feeding several regressors.
    std::vector<ReducerGroup> groups;
    for (std::size_t c = 0; c < config.cells.size(); ++c) {
        const auto& cell = config.cells[c];
        const std::string key = cell.reducer ? cell.reducer->signature() : "none";
        auto it = std::find_if(groups.begin(), groups.end(), [&](const ReducerGroup& g) {
            return (g.spec ? g.spec->signature() : "none") == key;
        });
        if (it == groups.end()) {
            groups.push_back(ReducerGroup{cell.reducer, fnv1a(key), {c}});
        } else {
            it->cell_indices.push_back(c);
        }
    }

    struct Job {
        std::size_t group;
        std::size_t target_idx;
        int fold;
    };
    std::vector<Job> jobs;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        for (std::size_t t = 0; t < config.targets.size(); ++t) {
            for (int f = 0; f < config.k_folds; ++f) {
                jobs.push_back(Job{g, t, f});
            }
        }
    }

    // slots[cell][target][fold]
    std::vector<std::vector<std::vector<FoldSlot>>> slots(
        config.cells.size(),
        std::vector<std::vector<FoldSlot>>(config.targets.size(),
                                           std::vector<FoldSlot>(static_cast<std::size_t>(config.k_folds))));

    auto run_job = [&](const Job& job) {
        const ReducerGroup& group = groups[job.group];
        const Target target = config.targets[job.target_idx];
        const Eigen::VectorXd& labels = labels_for(normalized, target);

        const auto train_idx = folds.train_indices(job.fold);
        const auto test_idx = folds.test_indices(job.fold);
        const FeatureMatrix train_features = select_rows(features, train_idx);
        const Eigen::VectorXd train_labels = select_rows(labels, train_idx);
        const Eigen::VectorXd test_labels = select_rows(labels, test_idx);

        auto fail_group = [&](const std::string& message) {
            for (const auto c : group.cell_indices) {
                slots[c][job.target_idx][static_cast<std::size_t>(job.fold)].error = message;
                slots[c][job.target_idx][static_cast<std::size_t>(job.fold)].test_count =
                    static_cast<Eigen::Index>(test_idx.size());
            }
        };

        Standardizer standardizer;
        FeatureMatrix standardized_train;
        Eigen::MatrixXd Ztr, Zte;
        try {
            standardizer = Standardizer::fit(train_features);
            standardized_train = standardizer.apply(train_features);
            Ztr = standardized_train.values;
            Zte = standardizer.apply(select_rows(features, test_idx).values);
            if (group.spec) {
                const std::uint64_t reducer_seed =
                    mix_seed(config.seed, kReducerStream ^ group.spec_hash, job.target_idx, static_cast<std::uint64_t>(job.fold));
                ProgressFn reducer_progress;
                if (progress) {
                    const std::string tag = std::string(reducer_kind_name(group.spec->kind)) + "(" +
                                            std::to_string(group.spec->dims) + ") " + target_name(target) +
                                            " fold " + std::to_string(job.fold);
                    reducer_progress = [&, tag](int epoch, double value) { progress(tag, epoch, value); };
                }
                const Reducer reducer =
                    fit_reducer_stage(standardized_train, train_labels, *group.spec, reducer_seed, reducer_progress);
                Ztr = reducer.transform(Ztr);
                Zte = reducer.transform(Zte);
            }
        } catch (const Error& e) {
            fail_group(std::string(error_code_name(e.code())) + " (fold " + std::to_string(job.fold) + ")");
            return;
        }

        for (const auto c : group.cell_indices) {
            FoldSlot& slot = slots[c][job.target_idx][static_cast<std::size_t>(job.fold)];
            slot.test_count = static_cast<Eigen::Index>(test_idx.size());
            try {
                const auto& cell = config.cells[c];
                Eigen::VectorXd prediction;
                if (cell.regressor == RegressorKind::Svr) {
                    prediction = predict_svr(fit_svr(Ztr, train_labels, cell.svr), Zte);
                } else {
                    GbmConfig gbm_config = cell.gbm;
                    gbm_config.seed = mix_seed(config.seed, kRegressorStream, c, static_cast<std::uint64_t>(job.fold));
                    prediction = predict_gbm(fit_gbm(Ztr, train_labels, gbm_config), Zte);
                }
                slot.r2 = r2_score(test_labels, prediction);
            } catch (const Error& e) {
                slot.error = std::string(error_code_name(e.code())) + " (fold " + std::to_string(job.fold) + ")";
            }
        }
    };

    const int workers = std::max(1, config.jobs);
    if (workers == 1) {
        for (const auto& job : jobs) run_job(job);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1)) {
                run_job(jobs[i]);
            }
        };
        std::vector<std::thread> pool;
        for (int w = 0; w < workers - 1; ++w) pool.emplace_back(worker);
        worker();
        for (auto& t : pool) t.join();
    }

    ExperimentReport report;
    report.targets = config.targets;
    report.literature = config.literature;
    report.k_folds = config.k_folds;
    report.seed = config.seed;
    report.preset = config.preset;
    {
        std::ostringstream hex;
        hex << std::hex << std::setw(16) << std::setfill('0') << fnv1a(experiment_config_to_json_string(config));
        report.config_hash = hex.str();
    }

    for (std::size_t c = 0; c < config.cells.size(); ++c) {
        CellReport cell_report;
        cell_report.label = config.cells[c].label();
        for (std::size_t t = 0; t < config.targets.size(); ++t) {
            CellTargetResult result;
            for (const auto& slot : slots[c][t]) {
                result.fold_test_counts.push_back(slot.test_count);
                if (!slot.error.empty() && result.error.empty()) {
                    result.error = slot.error;
                }
                result.fold_r2.push_back(slot.r2);
            }
            if (result.failed()) {
                result.fold_r2.clear();
            } else {
                const double n = static_cast<double>(result.fold_r2.size());
                result.mean = std::accumulate(result.fold_r2.begin(), result.fold_r2.end(), 0.0) / n;
                double var = 0.0;
                for (const double v : result.fold_r2) var += (v - result.mean) * (v - result.mean);
                result.std_dev = std::sqrt(var / n);
            }
            cell_report.per_target.push_back(std::move(result));
        }
        report.cells.push_back(std::move(cell_report));
    }
    return report;
}

ExperimentReport run_experiment_from_files(const ExperimentConfig& config,
                                           const ExperimentProgressFn& progress) {
    const FeatureMatrix features = load_feature_table(config.features_path);
    const AnnotationTable annotations = load_annotations(config.annotations_path);
    return run_experiment(features, annotations, config, progress);
}

std::string summarize(const ExperimentReport& report) {
    std::ostringstream os;
    auto format_cell = [](const CellTargetResult& r) {
        if (r.failed()) {
            return "FAILED(" + r.error + ")";
        }
        std::ostringstream v;
        v << std::fixed << std::setprecision(3) << r.mean << " +/- " << r.std_dev;
        return v.str();
    };

    std::size_t width = 24;
    for (const auto& cell : report.cells) width = std::max(width, cell.label.size());
    for (const auto& row : report.literature) width = std::max(width, row.name.size());

    os << std::left << std::setw(static_cast<int>(width)) << "model";
    for (const auto t : report.targets) {
        os << " | " << std::setw(22) << target_name(t);
    }
    os << '\n';
    os << std::string(width, '-');
    for (std::size_t t = 0; t < report.targets.size(); ++t) os << "-+-" << std::string(22, '-');
    os << '\n';

    for (const auto& cell : report.cells) {
        os << std::left << std::setw(static_cast<int>(width)) << cell.label;
        for (const auto& result : cell.per_target) {
            os << " | " << std::setw(22) << format_cell(result);
        }
        os << '\n';
    }

    for (const auto& row : report.literature) {
        os << std::left << std::setw(static_cast<int>(width)) << row.name;
        for (const auto t : report.targets) {
            const auto& mean = t == Target::Valence ? row.valence_mean : row.arousal_mean;
            const auto& sd = t == Target::Valence ? row.valence_std : row.arousal_std;
            std::ostringstream v;
            if (mean) {
                v << std::fixed << std::setprecision(3) << *mean;
                if (sd) v << " +/- " << *sd;
            } else {
                v << "-";
            }
            os << " | " << std::setw(22) << v.str();
        }
        os << " [literature]\n";
    }
    return os.str();
}

namespace {

json literature_to_json(const LiteratureRow& row) {
    json j{{"name", row.name}};
    if (row.valence_mean) j["valence_mean"] = *row.valence_mean;
    if (row.valence_std) j["valence_std"] = *row.valence_std;
    if (row.arousal_mean) j["arousal_mean"] = *row.arousal_mean;
    if (row.arousal_std) j["arousal_std"] = *row.arousal_std;
    j["source"] = "literature";
    return j;
}

}  // namespace

std::string report_to_json_string(const ExperimentReport& report) {
    json doc;
    doc["preset"] = report.preset;
    doc["k_folds"] = report.k_folds;
    doc["seed"] = report.seed;
    doc["config_hash"] = report.config_hash;
    json targets = json::array();
    for (const auto t : report.targets) targets.push_back(target_name(t));
    doc["targets"] = targets;

    json cells = json::array();
    for (const auto& cell : report.cells) {
        json cell_json{{"label", cell.label}};
        for (std::size_t t = 0; t < report.targets.size(); ++t) {
            const auto& result = cell.per_target[t];
            json r;
            if (result.failed()) {
                r["error"] = result.error;
            } else {
                r["fold_r2"] = result.fold_r2;
                r["mean"] = result.mean;
                r["std"] = result.std_dev;
            }
            r["fold_test_counts"] = result.fold_test_counts;
            cell_json[target_name(report.targets[t])] = std::move(r);
        }
        cells.push_back(std::move(cell_json));
    }
    doc["cells"] = std::move(cells);

    if (!report.literature.empty()) {
        json rows = json::array();
        for (const auto& row : report.literature) rows.push_back(literature_to_json(row));
        doc["literature"] = std::move(rows);
    }
    return doc.dump(2);
}

namespace {

MiningConfig mining_from_json(const json& j, MiningConfig base) {
    if (j.contains("delta_p")) base.delta_p = j.at("delta_p").get<double>();
    if (j.contains("delta_n")) base.delta_n = j.at("delta_n").get<double>();
    if (j.contains("max_attempts")) base.max_attempts = j.at("max_attempts").get<int>();
    return base;
}

TnnTrainConfig tnn_from_json(const json& j, TnnTrainConfig base) {
    if (j.contains("triplets_per_round")) base.triplets_per_round = j.at("triplets_per_round").get<std::size_t>();
    if (j.contains("epochs_per_round")) base.epochs_per_round = j.at("epochs_per_round").get<int>();
    if (j.contains("rounds")) base.rounds = j.at("rounds").get<int>();
    if (j.contains("batch_size")) base.batch_size = j.at("batch_size").get<int>();
    if (j.contains("margin")) base.margin = j.at("margin").get<double>();
    if (j.contains("learning_rate")) base.learning_rate = j.at("learning_rate").get<double>();
    return base;
}

AeTrainConfig ae_from_json(const json& j, AeTrainConfig base) {
    if (j.contains("epochs")) base.epochs = j.at("epochs").get<int>();
    if (j.contains("batch_size")) base.batch_size = j.at("batch_size").get<int>();
    if (j.contains("learning_rate")) base.learning_rate = j.at("learning_rate").get<double>();
    return base;
}

SvrConfig svr_from_json(const json& j, SvrConfig base) {
    if (j.contains("c")) base.c = j.at("c").get<double>();
    if (j.contains("epsilon")) base.epsilon = j.at("epsilon").get<double>();
    if (j.contains("gamma")) base.gamma = j.at("gamma").get<double>();
    if (j.contains("tolerance")) base.tolerance = j.at("tolerance").get<double>();
    if (j.contains("max_passes")) base.max_passes = j.at("max_passes").get<int>();
    return base;
}

GbmConfig gbm_from_json(const json& j, GbmConfig base) {
    if (j.contains("n_trees")) base.n_trees = j.at("n_trees").get<int>();
    if (j.contains("max_depth")) base.max_depth = j.at("max_depth").get<int>();
    if (j.contains("learning_rate")) base.learning_rate = j.at("learning_rate").get<double>();
    if (j.contains("min_samples_leaf")) base.min_samples_leaf = j.at("min_samples_leaf").get<int>();
    return base;
}

CellSpec cell_from_json(const json& j) {
    CellSpec cell;
    const std::string reducer_name = j.value("reducer", std::string("none"));
    if (reducer_name != "none") {
        ReducerSpec spec;
        spec.kind = reducer_kind_from_name(reducer_name);
        if (!j.contains("dims")) {
            throw Error(ErrorCode::InvalidConfig, "cell with reducer '" + reducer_name + "' needs dims");
        }
        spec.dims = j.at("dims").get<int>();
        if (j.contains("tnn")) {
            spec.tnn = tnn_from_json(j.at("tnn"), spec.tnn);
            spec.mining = mining_from_json(j.at("tnn"), spec.mining);
        }
        if (j.contains("ae")) spec.ae = ae_from_json(j.at("ae"), spec.ae);
        if (j.contains("rp_seed")) spec.rp_seed = j.at("rp_seed").get<std::uint64_t>();
        cell.reducer = spec;
    }
    cell.regressor = regressor_kind_from_name(j.value("regressor", std::string("svr")));
    if (j.contains("svr")) cell.svr = svr_from_json(j.at("svr"), cell.svr);
    if (j.contains("gbm")) cell.gbm = gbm_from_json(j.at("gbm"), cell.gbm);
    return cell;
}

json cell_to_json(const CellSpec& cell) {
    json j;
    if (cell.reducer) {
        j["reducer"] = reducer_kind_name(cell.reducer->kind);
        j["dims"] = cell.reducer->dims;
        if (cell.reducer->kind == ReducerKind::Tnn) {
            j["tnn"] = json{{"delta_p", cell.reducer->mining.delta_p},
                            {"delta_n", cell.reducer->mining.delta_n},
                            {"triplets_per_round", cell.reducer->tnn.triplets_per_round},
                            {"epochs_per_round", cell.reducer->tnn.epochs_per_round},
                            {"rounds", cell.reducer->tnn.rounds},
                            {"batch_size", cell.reducer->tnn.batch_size},
                            {"margin", cell.reducer->tnn.margin},
                            {"learning_rate", cell.reducer->tnn.learning_rate}};
        } else if (cell.reducer->kind == ReducerKind::Ae) {
            j["ae"] = json{{"epochs", cell.reducer->ae.epochs},
                           {"batch_size", cell.reducer->ae.batch_size},
                           {"learning_rate", cell.reducer->ae.learning_rate}};
        } else if (cell.reducer->kind == ReducerKind::Rp) {
            j["rp_seed"] = cell.reducer->rp_seed;
        }
    } else {
        j["reducer"] = "none";
    }
    j["regressor"] = regressor_kind_name(cell.regressor);
    if (cell.regressor == RegressorKind::Svr) {
        j["svr"] = json{{"c", cell.svr.c},
                        {"epsilon", cell.svr.epsilon},
                        {"gamma", cell.svr.gamma},
                        {"tolerance", cell.svr.tolerance},
                        {"max_passes", cell.svr.max_passes}};
    } else {
        j["gbm"] = json{{"n_trees", cell.gbm.n_trees},
                        {"max_depth", cell.gbm.max_depth},
                        {"learning_rate", cell.gbm.learning_rate},
                        {"min_samples_leaf", cell.gbm.min_samples_leaf}};
    }
    return j;
}

}  // namespace

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::MissingFile, path);
    }
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, path + ": " + e.what());
    }

    ExperimentConfig config;
    if (doc.contains("preset") && doc.at("preset").get<std::string>() != "custom") {
        config = make_preset(doc.at("preset").get<std::string>());
    }
    if (doc.contains("features")) config.features_path = doc.at("features").get<std::string>();
    if (doc.contains("annotations")) config.annotations_path = doc.at("annotations").get<std::string>();
    if (doc.contains("k_folds")) config.k_folds = doc.at("k_folds").get<int>();
    if (doc.contains("seed")) config.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("jobs")) config.jobs = doc.at("jobs").get<int>();
    if (doc.contains("targets")) {
        config.targets.clear();
        for (const auto& t : doc.at("targets")) {
            config.targets.push_back(target_from_name(t.get<std::string>()));
        }
    }
    if (doc.contains("cells")) {
        config.cells.clear();
        for (const auto& cell : doc.at("cells")) {
            config.cells.push_back(cell_from_json(cell));
        }
    }
    if (config.cells.empty()) {
        throw Error(ErrorCode::InvalidConfig, path + ": no cells configured");
    }
    return config;
}

std::string experiment_config_to_json_string(const ExperimentConfig& config) {
    json doc;
    doc["preset"] = config.preset;
    doc["features"] = config.features_path;
    doc["annotations"] = config.annotations_path;
    doc["k_folds"] = config.k_folds;
    doc["seed"] = config.seed;
    json targets = json::array();
    for (const auto t : config.targets) targets.push_back(target_name(t));
    doc["targets"] = std::move(targets);
    json cells = json::array();
    for (const auto& cell : config.cells) cells.push_back(cell_to_json(cell));
    doc["cells"] = std::move(cells);
    return doc.dump(2);
}

namespace {

CellSpec preset_cell(std::optional<ReducerSpec> reducer, RegressorKind regressor) {
    CellSpec cell;
    cell.reducer = std::move(reducer);
    cell.regressor = regressor;
    return cell;
}

ReducerSpec preset_reducer(ReducerKind kind, int dims, std::size_t triplets_per_round) {
    ReducerSpec spec;
    spec.kind = kind;
    spec.dims = dims;
    spec.tnn.triplets_per_round = triplets_per_round;
    return spec;
}

}  // namespace

ExperimentConfig make_preset(const std::string& name) {
    ExperimentConfig config;
    config.preset = name;
    if (name == "mediaeval2013") {
        const int dims = 600;
        const std::size_t triplets = 50000;
        config.cells = {
            preset_cell(std::nullopt, RegressorKind::Gbm),
            preset_cell(preset_reducer(ReducerKind::Pca, dims, triplets), RegressorKind::Gbm),
            preset_cell(preset_reducer(ReducerKind::Rp, dims, triplets), RegressorKind::Gbm),
            preset_cell(preset_reducer(ReducerKind::Ae, dims, triplets), RegressorKind::Gbm),
            preset_cell(preset_reducer(ReducerKind::Tnn, dims, triplets), RegressorKind::Gbm),
            preset_cell(std::nullopt, RegressorKind::Svr),
            preset_cell(preset_reducer(ReducerKind::Pca, dims, triplets), RegressorKind::Svr),
            preset_cell(preset_reducer(ReducerKind::Rp, dims, triplets), RegressorKind::Svr),
            preset_cell(preset_reducer(ReducerKind::Ae, dims, triplets), RegressorKind::Svr),
            preset_cell(preset_reducer(ReducerKind::Tnn, dims, triplets), RegressorKind::Svr),
        };
        config.literature = {
            LiteratureRow{"SVR (Markov 2013)", 0.112, std::nullopt, 0.300, std::nullopt},
            LiteratureRow{"GPR (Markov 2013)", 0.170, std::nullopt, 0.581, std::nullopt},
            LiteratureRow{"GPR (Fukuyama 2016)", 0.413, 0.043, 0.636, 0.040},
        };
        return config;
    }
    if (name == "deam") {
        const std::size_t triplets = 150000;
        config.cells = {
            preset_cell(std::nullopt, RegressorKind::Svr),
            preset_cell(std::nullopt, RegressorKind::Gbm),
        };
        for (const int dims : {100, 50}) {
            for (const auto kind : {ReducerKind::Pca, ReducerKind::Rp, ReducerKind::Ae, ReducerKind::Tnn}) {
                config.cells.push_back(preset_cell(preset_reducer(kind, dims, triplets), RegressorKind::Gbm));
            }
        }
        for (const int dims : {100, 50}) {
            for (const auto kind : {ReducerKind::Pca, ReducerKind::Rp, ReducerKind::Ae, ReducerKind::Tnn}) {
                config.cells.push_back(preset_cell(preset_reducer(kind, dims, triplets), RegressorKind::Svr));
            }
        }
        return config;
    }
    throw Error(ErrorCode::InvalidConfig, "unknown preset '" + name + "' (expected mediaeval2013 or deam)");
}

std::vector<std::string> arousal_quartile_classes(const Eigen::VectorXd& labels) {
    const auto n = static_cast<std::size_t>(labels.size());
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double va = labels(static_cast<Eigen::Index>(a));
        const double vb = labels(static_cast<Eigen::Index>(b));
        if (va != vb) return va > vb;
        return a < b;
    });

    // 744 songs get the fixed 100/median/100 split; other sizes use n/4
    // quantiles with the remainder going to the middle classes.
    const std::size_t edge = n == 744 ? 100 : n / 4;
    if (edge == 0 || 2 * edge > n) {
        throw Error(ErrorCode::DegenerateData, "too few samples for a four-class split");
    }
    const std::size_t middle = n - 2 * edge;
    const std::size_t mid_high = (middle + 1) / 2;

    std::vector<std::string> classes(n);
    for (std::size_t rank = 0; rank < n; ++rank) {
        const char* tag;
        if (rank < edge) tag = "high";
        else if (rank < edge + mid_high) tag = "mid-high";
        else if (rank < n - edge) tag = "mid-low";
        else tag = "low";
        classes[order[rank]] = tag;
    }
    return classes;
}

void export_embeddings(const Reducer& reducer, const std::optional<Standardizer>& standardizer,
                       const FeatureMatrix& features, const AnnotationTable& labels, Target target,
                       const std::string& path) {
    const AnnotationTable aligned = align_annotations(features, labels);
    Eigen::MatrixXd X = features.values;
    if (standardizer) {
        X = standardizer->apply(X);
    }
    const Eigen::MatrixXd Z = reducer.transform(X);
    const Eigen::VectorXd& y = labels_for(aligned, target);
    const auto classes = arousal_quartile_classes(y);

    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot write " + path);
    }
    out << "song_id";
    for (Eigen::Index c = 0; c < Z.cols(); ++c) out << ",e" << (c + 1);
    out << ',' << target_name(target) << ",class\n";
    for (Eigen::Index i = 0; i < Z.rows(); ++i) {
        out << features.song_ids[static_cast<std::size_t>(i)];
        for (Eigen::Index c = 0; c < Z.cols(); ++c) out << ',' << format_double(Z(i, c));
        out << ',' << format_double(y(i)) << ',' << classes[static_cast<std::size_t>(i)] << '\n';
    }
}

}  // namespace tnr

#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tnr/data.hpp"
#include "tnr/gbm.hpp"
#include "tnr/model_io.hpp"
#include "tnr/network.hpp"
#include "tnr/reducers.hpp"
#include "tnr/svr.hpp"
#include "tnr/triplets.hpp"

namespace tnr {

// 1 - SS_res / SS_tot. Throws DegenerateTarget when y_true has no variance
// (including single-sample inputs).
double r2_score(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred);

enum class RegressorKind { Svr, Gbm };
const char* regressor_kind_name(RegressorKind kind);
RegressorKind regressor_kind_from_name(const std::string& name);

// Which reducer to fit for a cell, with its training knobs. Seed fields
// inside the sub-configs are ignored; experiment runs derive per-fold seeds.
struct ReducerSpec {
    ReducerKind kind = ReducerKind::Pca;
    int dims = 0;
    MiningConfig mining;
    TnnTrainConfig tnn;
    AeTrainConfig ae;
    std::uint64_t rp_seed = 50;

    // Stable key used for grouping identical reducers and deriving seeds.
    std::string signature() const;
};

// One table row: an optional reducer followed by a regressor.
struct CellSpec {
    std::optional<ReducerSpec> reducer;
    RegressorKind regressor = RegressorKind::Svr;
    SvrConfig svr;
    GbmConfig gbm;

    std::string label() const;  // e.g. "TNN-SVR (600 features)"
};

// Context rows quoted from prior work; rendered, never computed.
struct LiteratureRow {
    std::string name;
    std::optional<double> valence_mean, valence_std;
    std::optional<double> arousal_mean, arousal_std;
};

struct ExperimentConfig {
    std::string features_path;
    std::string annotations_path;
    std::vector<Target> targets{Target::Valence, Target::Arousal};
    std::vector<CellSpec> cells;
    int k_folds = 10;
    std::uint64_t seed = 42;
    int jobs = 1;
    std::string preset = "custom";
    std::vector<LiteratureRow> literature;
};

struct CellTargetResult {
    std::vector<double> fold_r2;
    std::vector<Eigen::Index> fold_test_counts;
    double mean = 0.0;
    double std_dev = 0.0;  // population convention over folds
    std::string error;     // first failure as "<ErrorCode> (fold i)"; empty on success

    bool failed() const { return !error.empty(); }
};

struct CellReport {
    std::string label;
    std::vector<CellTargetResult> per_target;  // aligned with report targets
};

struct ExperimentReport {
    std::vector<Target> targets;
    std::vector<CellReport> cells;  // config order
    std::vector<LiteratureRow> literature;
    int k_folds = 0;
    std::uint64_t seed = 0;
    std::string preset;
    std::string config_hash;

    bool any_failed() const;
    const CellTargetResult& result(const std::string& label, Target target) const;
};

// Per-epoch training progress for long reducer fits; receives
// (description, epoch, metric).
using ExperimentProgressFn = std::function<void(const std::string&, int, double)>;

// Cross-validated grid run. Standardizer, reducer, and regressor are refit on
// each fold's training rows only; label normalization is dataset-level
// preprocessing and happens once up front. Cells sharing an identical reducer
// spec share the fitted reducer per (target, fold).
ExperimentReport run_experiment(const FeatureMatrix& features, const AnnotationTable& annotations,
                                const ExperimentConfig& config,
                                const ExperimentProgressFn& progress = nullptr);

// Loads config.features_path / config.annotations_path first.
ExperimentReport run_experiment_from_files(const ExperimentConfig& config,
                                           const ExperimentProgressFn& progress = nullptr);

// Single-fold pipeline pieces, exposed so training CLI paths and tests reuse
// the exact per-fold fitting logic.
Reducer fit_reducer_stage(const FeatureMatrix& standardized_train, const Eigen::VectorXd& train_labels,
                          const ReducerSpec& spec, std::uint64_t seed,
                          const ProgressFn& progress = nullptr);

struct FittedPipeline {
    Standardizer standardizer;
    std::optional<Reducer> reducer;
    std::variant<SvrModel, GbmModel> regressor;

    Eigen::VectorXd predict(const Eigen::MatrixXd& raw_feature_values) const;
};

FittedPipeline fit_cell_pipeline(const FeatureMatrix& train_features, const Eigen::VectorXd& train_labels,
                                 const CellSpec& cell, std::uint64_t reducer_seed, std::uint64_t regressor_seed);

// Human-readable table mirroring the report; one row per cell, literature
// rows appended with a [literature] marker.
std::string summarize(const ExperimentReport& report);

std::string report_to_json_string(const ExperimentReport& report);

// Experiment config JSON file (schema documented in the README).
ExperimentConfig load_experiment_config(const std::string& path);
std::string experiment_config_to_json_string(const ExperimentConfig& config);

// Built-in presets: "mediaeval2013" (600-dim TNN, 50k triplets) and
// "deam" (100/50-dim TNN, 150k triplets). Data paths are left empty.
ExperimentConfig make_preset(const std::string& name);

// Writes song_id, embedding coordinates, the target label, and a four-class
// tag (high / mid-high / mid-low / low). Exactly 100 songs land in each of
// the extreme classes when n == 744, otherwise n/4 quantile splits are used.
void export_embeddings(const Reducer& reducer, const std::optional<Standardizer>& standardizer,
                       const FeatureMatrix& features, const AnnotationTable& labels, Target target,
                       const std::string& path);

// Class tags for export_embeddings, index-aligned with `labels`.
std::vector<std::string> arousal_quartile_classes(const Eigen::VectorXd& labels);

}  // namespace tnr

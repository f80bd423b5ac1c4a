#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <json.hpp>

#include "tnr/data.hpp"
#include "tnr/evaluation.hpp"
#include "tnr/format.hpp"
#include "tnr/model_io.hpp"
#include "tnr/network.hpp"
#include "tnr/reducers.hpp"

namespace {

using tnr::Target;

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_embeddings_csv(const std::string& path, const std::vector<std::string>& song_ids,
                          const Eigen::MatrixXd& Z) {
    std::ofstream out(path);
    if (!out) {
        throw tnr::Error(tnr::ErrorCode::IoError, "cannot write " + path);
    }
    out << "song_id";
    for (Eigen::Index c = 0; c < Z.cols(); ++c) out << ",e" << (c + 1);
    out << '\n';
    for (Eigen::Index i = 0; i < Z.rows(); ++i) {
        out << song_ids[static_cast<std::size_t>(i)];
        for (Eigen::Index c = 0; c < Z.cols(); ++c) out << ',' << tnr::format_double(Z(i, c));
        out << '\n';
    }
}

void write_predictions_csv(const std::string& path, const std::vector<std::string>& song_ids,
                           const Eigen::VectorXd& y) {
    std::ofstream out(path);
    if (!out) {
        throw tnr::Error(tnr::ErrorCode::IoError, "cannot write " + path);
    }
    out << "song_id,prediction\n";
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        out << song_ids[static_cast<std::size_t>(i)] << ',' << tnr::format_double(y(i)) << '\n';
    }
}

tnr::ProgressFn stderr_progress(const std::string& tag) {
    return [tag](int epoch, double value) {
        std::cerr << tag << " epoch " << epoch << " loss " << tnr::format_double(value) << '\n';
    };
}

struct TnnFlags {
    int dims = 600;
    double delta_p = 0.1;
    double delta_n = 0.5;
    double margin = 0.2;
    double learning_rate = 1e-5;
    int epochs_per_round = 10;
    int rounds = 25;
    std::size_t triplets_per_round = 50000;
    int batch_size = 128;
};

void add_tnn_flags(CLI::App* cmd, TnnFlags& flags) {
    cmd->add_option("--dims", flags.dims, "embedding dimension");
    cmd->add_option("--delta-p", flags.delta_p, "positive threshold on normalized labels");
    cmd->add_option("--delta-n", flags.delta_n, "negative threshold on normalized labels");
    cmd->add_option("--margin", flags.margin, "triplet loss margin");
    cmd->add_option("--lr", flags.learning_rate, "Adam learning rate");
    cmd->add_option("--epochs-per-round", flags.epochs_per_round, "epochs per triplet regeneration");
    cmd->add_option("--rounds", flags.rounds, "triplet regeneration rounds");
    cmd->add_option("--triplets-per-round", flags.triplets_per_round, "triplets mined per round");
    cmd->add_option("--batch-size", flags.batch_size, "mini-batch size");
}

int run(int argc, char** argv) {
    CLI::App app{"Triplet-network dimensionality reduction and regression benchmarks "
                 "for continuous-label (valence/arousal) feature tables"};
    app.require_subcommand(1);
    std::uint64_t seed = 42;

    // validate
    auto* validate = app.add_subcommand("validate", "Check feature/annotation CSVs and print their shape");
    std::string v_features, v_annotations;
    validate->add_option("--features", v_features, "feature CSV")->required();
    validate->add_option("--annotations", v_annotations, "annotation CSV");
    validate->add_option("--seed", seed, "unused; accepted for interface uniformity");

    // train-tnn
    auto* train_tnn_cmd = app.add_subcommand("train-tnn", "Train a triplet-network embedding");
    std::string t_features, t_annotations, t_target = "valence", t_out, t_dump_triplets;
    TnnFlags tnn_flags;
    train_tnn_cmd->add_option("--features", t_features, "feature CSV")->required();
    train_tnn_cmd->add_option("--annotations", t_annotations, "annotation CSV")->required();
    train_tnn_cmd->add_option("--target", t_target, "valence or arousal");
    train_tnn_cmd->add_option("--out", t_out, "model output path")->required();
    add_tnn_flags(train_tnn_cmd, tnn_flags);
    train_tnn_cmd->add_option("--dump-triplets", t_dump_triplets,
                              "debug: write the first round's mined triplet indices to this CSV");
    train_tnn_cmd->add_option("--seed", seed, "training seed");

    // train-ae
    auto* train_ae_cmd = app.add_subcommand("train-ae", "Train an autoencoder reducer");
    std::string a_features, a_out;
    int a_dims = 600, a_epochs = 100, a_batch = 32;
    double a_lr = 3e-3;
    train_ae_cmd->add_option("--features", a_features, "feature CSV")->required();
    train_ae_cmd->add_option("--dims", a_dims, "encoder width");
    train_ae_cmd->add_option("--epochs", a_epochs, "max training epochs");
    train_ae_cmd->add_option("--batch-size", a_batch, "mini-batch size");
    train_ae_cmd->add_option("--lr", a_lr, "Adam learning rate");
    train_ae_cmd->add_option("--out", a_out, "model output path")->required();
    train_ae_cmd->add_option("--seed", seed, "training seed");

    // reduce
    auto* reduce_cmd = app.add_subcommand("reduce", "Embed a feature CSV with a saved reducer model");
    std::string r_model, r_features, r_out;
    reduce_cmd->add_option("--model", r_model, "saved reducer model")->required();
    reduce_cmd->add_option("--features", r_features, "feature CSV")->required();
    reduce_cmd->add_option("--out", r_out, "embeddings CSV output")->required();
    reduce_cmd->add_option("--seed", seed, "unused; accepted for interface uniformity");

    // regress
    auto* regress_cmd = app.add_subcommand("regress", "Fit SVR/GBM on one CSV, predict and score another");
    std::string g_train_features, g_train_annotations, g_test_features, g_test_annotations;
    std::string g_target = "valence", g_regressor = "svr", g_out, g_model_out;
    bool g_no_standardize = false;
    tnr::SvrConfig svr_config;
    tnr::GbmConfig gbm_config;
    regress_cmd->add_option("--train-features", g_train_features, "training feature CSV")->required();
    regress_cmd->add_option("--train-annotations", g_train_annotations, "training annotation CSV")->required();
    regress_cmd->add_option("--test-features", g_test_features, "test feature CSV")->required();
    regress_cmd->add_option("--test-annotations", g_test_annotations, "test annotation CSV")->required();
    regress_cmd->add_option("--target", g_target, "valence or arousal");
    regress_cmd->add_option("--regressor", g_regressor, "svr or gbm");
    regress_cmd->add_option("--out", g_out, "predictions CSV output")->required();
    regress_cmd->add_option("--model-out", g_model_out, "optional fitted-model output path");
    regress_cmd->add_flag("--no-standardize", g_no_standardize, "skip z-scoring (e.g. for embedding inputs)");
    regress_cmd->add_option("--svr-c", svr_config.c, "SVR regularization C");
    regress_cmd->add_option("--svr-epsilon", svr_config.epsilon, "SVR tube half-width");
    regress_cmd->add_option("--svr-gamma", svr_config.gamma, "RBF gamma (<=0 selects 1/d)");
    regress_cmd->add_option("--gbm-trees", gbm_config.n_trees, "boosting rounds");
    regress_cmd->add_option("--gbm-depth", gbm_config.max_depth, "tree depth");
    regress_cmd->add_option("--gbm-lr", gbm_config.learning_rate, "boosting shrinkage");
    regress_cmd->add_option("--gbm-min-leaf", gbm_config.min_samples_leaf, "min samples per leaf");
    regress_cmd->add_option("--seed", seed, "tie-break seed for GBM");

    // experiment
    auto* experiment_cmd = app.add_subcommand("experiment", "Run the cross-validated reducer x regressor grid");
    std::string e_preset, e_config, e_features, e_annotations, e_data_dir, e_out;
    int e_k_folds = 0, e_jobs = 0;
    experiment_cmd->add_option("--preset", e_preset, "mediaeval2013 or deam");
    experiment_cmd->add_option("--config", e_config, "experiment config JSON");
    experiment_cmd->add_option("--features", e_features, "feature CSV (overrides config/data-dir)");
    experiment_cmd->add_option("--annotations", e_annotations, "annotation CSV (overrides config/data-dir)");
    experiment_cmd->add_option("--data-dir", e_data_dir, "directory holding features.csv and annotations.csv");
    experiment_cmd->add_option("--out", e_out, "report JSON output");
    experiment_cmd->add_option("--k-folds", e_k_folds, "cross-validation folds");
    experiment_cmd->add_option("--jobs", e_jobs, "parallel (cell, fold) workers");
    experiment_cmd->add_option("--seed", seed, "experiment seed");

    // export-embeddings
    auto* export_cmd = app.add_subcommand("export-embeddings",
                                          "Embed songs and tag arousal/valence quartile classes for plotting");
    std::string x_model, x_features, x_annotations, x_target = "arousal", x_out;
    export_cmd->add_option("--model", x_model, "saved reducer model")->required();
    export_cmd->add_option("--features", x_features, "feature CSV")->required();
    export_cmd->add_option("--annotations", x_annotations, "annotation CSV")->required();
    export_cmd->add_option("--target", x_target, "label used for the class split");
    export_cmd->add_option("--out", x_out, "embeddings CSV output")->required();
    export_cmd->add_option("--seed", seed, "unused; accepted for interface uniformity");

    CLI11_PARSE(app, argc, argv);

    if (validate->parsed()) {
        const tnr::FeatureMatrix features = tnr::load_feature_table(v_features);
        std::cout << "features: n=" << features.rows() << " d=" << features.cols() << '\n';
        if (!v_annotations.empty()) {
            const tnr::AnnotationTable annotations = tnr::load_annotations(v_annotations);
            tnr::align_annotations(features, annotations);
            std::cout << "annotations: n=" << annotations.size() << " (aligned)\n";
        }
        return 0;
    }

    if (train_tnn_cmd->parsed()) {
        const tnr::FeatureMatrix features = tnr::load_feature_table(t_features);
        const tnr::AnnotationTable annotations =
            tnr::align_annotations(features, tnr::load_annotations(t_annotations));
        const tnr::AnnotationTable normalized = tnr::normalize_labels(annotations);
        const Target target = tnr::target_from_name(t_target);

        const tnr::Standardizer standardizer = tnr::Standardizer::fit(features);
        const tnr::FeatureMatrix standardized = standardizer.apply(features);

        tnr::MiningConfig mining;
        mining.delta_p = tnn_flags.delta_p;
        mining.delta_n = tnn_flags.delta_n;
        tnr::TnnTrainConfig config;
        config.embedding_dim = tnn_flags.dims;
        config.margin = tnn_flags.margin;
        config.learning_rate = tnn_flags.learning_rate;
        config.epochs_per_round = tnn_flags.epochs_per_round;
        config.rounds = tnn_flags.rounds;
        config.triplets_per_round = tnn_flags.triplets_per_round;
        config.batch_size = tnn_flags.batch_size;
        config.seed = seed;

        if (!t_dump_triplets.empty()) {
            const auto triplets = tnr::mine_triplets(tnr::labels_for(normalized, target),
                                                     config.triplets_per_round, mining,
                                                     tnr::tnn_round_mining_seed(config.seed, 0));
            tnr::dump_triplets_csv(triplets, t_dump_triplets);
        }
        tnr::EmbeddingModel model = tnr::train_tnn(standardized, tnr::labels_for(normalized, target), mining,
                                                   config, stderr_progress("train-tnn"));
        const double final_loss = model.training_log.back();
        std::vector<double> log = std::move(model.training_log);
        tnr::ReducerDocument doc{tnr::Reducer::triplet_network(std::move(model)), standardizer, std::move(log)};
        tnr::save_reducer(t_out, doc);
        std::cout << "trained tnn: d=" << features.cols() << " k=" << tnn_flags.dims << " final-loss "
                  << tnr::format_double(final_loss) << " -> " << t_out << '\n';
        return 0;
    }

    if (train_ae_cmd->parsed()) {
        const tnr::FeatureMatrix features = tnr::load_feature_table(a_features);
        const tnr::Standardizer standardizer = tnr::Standardizer::fit(features);
        const tnr::FeatureMatrix standardized = standardizer.apply(features);

        tnr::AeTrainConfig config;
        config.embedding_dim = a_dims;
        config.epochs = a_epochs;
        config.batch_size = a_batch;
        config.learning_rate = a_lr;
        config.seed = seed;
        tnr::AutoencoderModel model = tnr::train_autoencoder(standardized, config, stderr_progress("train-ae"));
        const double final_mse = model.training_log.empty() ? 0.0 : model.training_log.back();
        const auto epochs_run = model.training_log.size();
        std::vector<double> log = std::move(model.training_log);
        tnr::ReducerDocument doc{tnr::Reducer::autoencoder(std::move(model)), standardizer, std::move(log)};
        tnr::save_reducer(a_out, doc);
        std::cout << "trained ae: d=" << features.cols() << " k=" << a_dims << " epochs " << epochs_run
                  << " final-mse " << tnr::format_double(final_mse) << " -> " << a_out << '\n';
        return 0;
    }

    if (reduce_cmd->parsed()) {
        const tnr::ReducerDocument doc = tnr::load_reducer(r_model);
        const tnr::FeatureMatrix features = tnr::load_feature_table(r_features);
        Eigen::MatrixXd X = features.values;
        if (doc.standardizer) {
            X = doc.standardizer->apply(X);
        } else if (X.cols() != doc.reducer.input_dim()) {
            throw tnr::Error(tnr::ErrorCode::DimensionMismatch,
                             "model expects " + std::to_string(doc.reducer.input_dim()) + " features, got " +
                                 std::to_string(X.cols()));
        }
        const Eigen::MatrixXd Z = doc.reducer.transform(X);
        write_embeddings_csv(r_out, features.song_ids, Z);
        std::cout << "reduced " << Z.rows() << " songs to " << Z.cols() << " dims -> " << r_out << '\n';
        return 0;
    }

    if (regress_cmd->parsed()) {
        const tnr::FeatureMatrix train_features = tnr::load_feature_table(g_train_features);
        const tnr::AnnotationTable train_annotations =
            tnr::align_annotations(train_features, tnr::load_annotations(g_train_annotations));
        const tnr::FeatureMatrix test_features = tnr::load_feature_table(g_test_features);
        const tnr::AnnotationTable test_annotations =
            tnr::align_annotations(test_features, tnr::load_annotations(g_test_annotations));
        if (train_features.columns != test_features.columns) {
            throw tnr::Error(tnr::ErrorCode::ColumnMismatch, "train and test feature columns differ");
        }
        const Target target = tnr::target_from_name(g_target);
        const Eigen::VectorXd& y_train = tnr::labels_for(train_annotations, target);
        const Eigen::VectorXd& y_test = tnr::labels_for(test_annotations, target);

        Eigen::MatrixXd Xtr = train_features.values;
        Eigen::MatrixXd Xte = test_features.values;
        std::optional<tnr::Standardizer> standardizer;
        if (!g_no_standardize) {
            standardizer = tnr::Standardizer::fit(train_features);
            Xtr = standardizer->apply(Xtr);
            Xte = standardizer->apply(Xte);
        }

        Eigen::VectorXd prediction;
        if (tnr::regressor_kind_from_name(g_regressor) == tnr::RegressorKind::Svr) {
            const tnr::SvrModel model = tnr::fit_svr(Xtr, y_train, svr_config);
            if (!model.converged) {
                std::cerr << "warning: SVR stopped at the iteration cap before reaching tolerance\n";
            }
            prediction = tnr::predict_svr(model, Xte);
            if (!g_model_out.empty()) tnr::save_svr(g_model_out, model, standardizer);
        } else {
            gbm_config.seed = seed;
            const tnr::GbmModel model = tnr::fit_gbm(Xtr, y_train, gbm_config);
            prediction = tnr::predict_gbm(model, Xte);
            if (!g_model_out.empty()) tnr::save_gbm(g_model_out, model, standardizer);
        }
        write_predictions_csv(g_out, test_features.song_ids, prediction);
        std::cout << "r2 " << tnr::format_double(tnr::r2_score(y_test, prediction)) << " (" << g_regressor
                  << ", " << g_target << ", n_test=" << y_test.size() << ")\n";
        return 0;
    }

    if (experiment_cmd->parsed()) {
        tnr::ExperimentConfig config;
        if (!e_config.empty()) {
            config = tnr::load_experiment_config(e_config);
        } else if (!e_preset.empty()) {
            config = tnr::make_preset(e_preset);
        } else {
            throw tnr::Error(tnr::ErrorCode::InvalidConfig, "experiment needs --preset or --config");
        }
        if (!e_data_dir.empty()) {
            if (config.features_path.empty()) config.features_path = e_data_dir + "/features.csv";
            if (config.annotations_path.empty()) config.annotations_path = e_data_dir + "/annotations.csv";
        }
        if (!e_features.empty()) config.features_path = e_features;
        if (!e_annotations.empty()) config.annotations_path = e_annotations;
        if (config.features_path.empty() || config.annotations_path.empty()) {
            throw tnr::Error(tnr::ErrorCode::InvalidConfig,
                             "experiment needs feature/annotation paths (--features/--annotations or --data-dir)");
        }
        if (experiment_cmd->count("--seed") > 0) config.seed = seed;
        if (e_k_folds > 0) config.k_folds = e_k_folds;
        if (e_jobs > 0) config.jobs = e_jobs;

        const std::string started = utc_timestamp();
        const tnr::ExperimentReport report = tnr::run_experiment_from_files(
            config, [](const std::string& tag, int epoch, double value) {
                std::cerr << tag << " epoch " << epoch << " loss " << tnr::format_double(value) << '\n';
            });

        std::cout << tnr::summarize(report);
        if (!e_out.empty()) {
            nlohmann::json doc = nlohmann::json::parse(tnr::report_to_json_string(report));
            doc["metadata"] =
                nlohmann::json{{"started_at", started}, {"finished_at", utc_timestamp()}, {"jobs", config.jobs}};
            std::ofstream out(e_out);
            if (!out) {
                throw tnr::Error(tnr::ErrorCode::IoError, "cannot write " + e_out);
            }
            out << doc.dump(2) << '\n';
        }
        return report.any_failed() ? 2 : 0;
    }

    if (export_cmd->parsed()) {
        const tnr::ReducerDocument doc = tnr::load_reducer(x_model);
        const tnr::FeatureMatrix features = tnr::load_feature_table(x_features);
        const tnr::AnnotationTable annotations = tnr::load_annotations(x_annotations);
        tnr::export_embeddings(doc.reducer, doc.standardizer, features, annotations,
                               tnr::target_from_name(x_target), x_out);
        std::cout << "exported " << features.rows() << " embeddings -> " << x_out << '\n';
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const tnr::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.is_validation_error() ? 1 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}

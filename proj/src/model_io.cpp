#include "tnr/model_io.hpp"

#include <fstream>

#include <json.hpp>

namespace tnr {

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            row.push_back(m(i, j));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
    const auto rows = static_cast<Eigen::Index>(j.size());
    if (rows == 0) return {};
    const auto cols = static_cast<Eigen::Index>(j.at(0).size());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto& row = j.at(static_cast<std::size_t>(i));
        if (static_cast<Eigen::Index>(row.size()) != cols) {
            throw Error(ErrorCode::ShapeMismatch, "ragged matrix in model document");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
        }
    }
    return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out.push_back(v(i));
    }
    return out;
}

Eigen::VectorXd vector_from_json(const json& j) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        v(static_cast<Eigen::Index>(i)) = j.at(i).get<double>();
    }
    return v;
}

json layer_to_json(const DenseLayer& layer) {
    return json{{"activation", layer.activation == Activation::ReLU ? "relu" : "linear"},
                {"input_dim", layer.input_dim()},
                {"output_dim", layer.output_dim()},
                {"weights", matrix_to_json(layer.weights)},
                {"biases", vector_to_json(layer.biases)}};
}

DenseLayer layer_from_json(const json& j) {
    DenseLayer layer;
    const auto act = j.at("activation").get<std::string>();
    if (act == "relu") layer.activation = Activation::ReLU;
    else if (act == "linear") layer.activation = Activation::Linear;
    else throw Error(ErrorCode::InvalidConfig, "unknown activation '" + act + "'");
    layer.weights = matrix_from_json(j.at("weights"));
    layer.biases = vector_from_json(j.at("biases"));
    if (layer.weights.rows() != j.at("output_dim").get<Eigen::Index>() ||
        layer.weights.cols() != j.at("input_dim").get<Eigen::Index>() ||
        layer.biases.size() != layer.weights.rows()) {
        throw Error(ErrorCode::ShapeMismatch, "layer dims disagree with stored arrays");
    }
    return layer;
}

json standardizer_to_json(const Standardizer& s) {
    return json{{"mean", vector_to_json(s.mean)}, {"std", vector_to_json(s.std_dev)}};
}

Standardizer standardizer_from_json(const json& j) {
    Standardizer s;
    s.mean = vector_from_json(j.at("mean"));
    s.std_dev = vector_from_json(j.at("std"));
    return s;
}

void write_document(const std::string& path, const json& doc) {
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot write " + path);
    }
    out << doc.dump(2) << '\n';
}

json read_document(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::MissingFile, path);
    }
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::IoError, path + ": " + e.what());
    }
    if (!doc.contains("format") || doc.at("format").get<std::string>() != "tnr-model") {
        throw Error(ErrorCode::InvalidConfig, path + ": not a tnr model document");
    }
    if (doc.at("version").get<int>() != kFormatVersion) {
        throw Error(ErrorCode::InvalidConfig, path + ": unsupported model version");
    }
    return doc;
}

json document_shell(const std::string& kind, const std::optional<Standardizer>& standardizer) {
    json doc{{"format", "tnr-model"}, {"version", kFormatVersion}, {"kind", kind}};
    if (standardizer) {
        doc["standardizer"] = standardizer_to_json(*standardizer);
    }
    return doc;
}

std::optional<Standardizer> read_standardizer(const json& doc) {
    if (!doc.contains("standardizer")) return std::nullopt;
    return standardizer_from_json(doc.at("standardizer"));
}

}  // namespace

void save_reducer(const std::string& path, const ReducerDocument& doc) {
    json out = document_shell(reducer_kind_name(doc.reducer.kind()), doc.standardizer);
    switch (doc.reducer.kind()) {
        case ReducerKind::Pca: {
            const auto& pca = doc.reducer.as_pca();
            out["pca"] = json{{"mean", vector_to_json(pca.mean)},
                              {"components", matrix_to_json(pca.components)},
                              {"explained_variance", vector_to_json(pca.explained_variance)}};
            break;
        }
        case ReducerKind::Rp: {
            const auto& rp = doc.reducer.as_rp();
            out["rp"] = json{{"seed", rp.seed}, {"projection", matrix_to_json(rp.projection)}};
            break;
        }
        case ReducerKind::Tnn:
        case ReducerKind::Ae:
            out["layer"] = layer_to_json(doc.reducer.encoder_layer());
            break;
    }
    if (!doc.training_log.empty()) {
        out["training_log"] = doc.training_log;
    }
    write_document(path, out);
}

ReducerDocument load_reducer(const std::string& path) {
    const json doc = read_document(path);
    const auto kind = reducer_kind_from_name(doc.at("kind").get<std::string>());
    auto standardizer = read_standardizer(doc);
    std::vector<double> log;
    if (doc.contains("training_log")) {
        log = doc.at("training_log").get<std::vector<double>>();
    }

    switch (kind) {
        case ReducerKind::Pca: {
            PcaModel pca;
            const auto& body = doc.at("pca");
            pca.mean = vector_from_json(body.at("mean"));
            pca.components = matrix_from_json(body.at("components"));
            pca.explained_variance = vector_from_json(body.at("explained_variance"));
            return {Reducer::pca(std::move(pca)), std::move(standardizer), std::move(log)};
        }
        case ReducerKind::Rp: {
            RpModel rp;
            const auto& body = doc.at("rp");
            rp.seed = body.at("seed").get<std::uint64_t>();
            rp.projection = matrix_from_json(body.at("projection"));
            return {Reducer::random_projection(std::move(rp)), std::move(standardizer), std::move(log)};
        }
        case ReducerKind::Tnn: {
            EmbeddingModel model;
            model.layer = layer_from_json(doc.at("layer"));
            return {Reducer::triplet_network(std::move(model)), std::move(standardizer), std::move(log)};
        }
        case ReducerKind::Ae: {
            AutoencoderModel model;
            model.encoder = layer_from_json(doc.at("layer"));
            return {Reducer::autoencoder(std::move(model)), std::move(standardizer), std::move(log)};
        }
    }
    throw Error(ErrorCode::InvalidConfig, path + ": unreadable reducer document");
}

void save_svr(const std::string& path, const SvrModel& model, const std::optional<Standardizer>& standardizer) {
    json doc = document_shell("svr", standardizer);
    doc["svr"] = json{{"gamma", model.gamma},
                      {"bias", model.bias},
                      {"converged", model.converged},
                      {"dual_coefficients", vector_to_json(model.dual_coefficients)},
                      {"support_vectors", matrix_to_json(model.support_vectors)}};
    write_document(path, doc);
}

SvrDocument load_svr(const std::string& path) {
    const json doc = read_document(path);
    if (doc.at("kind").get<std::string>() != "svr") {
        throw Error(ErrorCode::InvalidConfig, path + ": not an SVR document");
    }
    SvrDocument out;
    const auto& body = doc.at("svr");
    out.model.gamma = body.at("gamma").get<double>();
    out.model.bias = body.at("bias").get<double>();
    out.model.converged = body.at("converged").get<bool>();
    out.model.dual_coefficients = vector_from_json(body.at("dual_coefficients"));
    out.model.support_vectors = matrix_from_json(body.at("support_vectors"));
    out.standardizer = read_standardizer(doc);
    return out;
}

void save_gbm(const std::string& path, const GbmModel& model, const std::optional<Standardizer>& standardizer) {
    json doc = document_shell("gbm", standardizer);
    json trees = json::array();
    for (const auto& tree : model.trees) {
        json nodes = json::array();
        for (const auto& node : tree.nodes) {
            nodes.push_back(json{{"feature", node.feature},
                                 {"threshold", node.threshold},
                                 {"left", node.left},
                                 {"right", node.right},
                                 {"value", node.value}});
        }
        trees.push_back(std::move(nodes));
    }
    doc["gbm"] = json{{"base_prediction", model.base_prediction},
                      {"learning_rate", model.learning_rate},
                      {"trees", std::move(trees)}};
    write_document(path, doc);
}

GbmDocument load_gbm(const std::string& path) {
    const json doc = read_document(path);
    if (doc.at("kind").get<std::string>() != "gbm") {
        throw Error(ErrorCode::InvalidConfig, path + ": not a GBM document");
    }
    GbmDocument out;
    const auto& body = doc.at("gbm");
    out.model.base_prediction = body.at("base_prediction").get<double>();
    out.model.learning_rate = body.at("learning_rate").get<double>();
    for (const auto& tree_json : body.at("trees")) {
        RegressionTree tree;
        for (const auto& node_json : tree_json) {
            TreeNode node;
            node.feature = node_json.at("feature").get<int>();
            node.threshold = node_json.at("threshold").get<double>();
            node.left = node_json.at("left").get<int>();
            node.right = node_json.at("right").get<int>();
            node.value = node_json.at("value").get<double>();
            tree.nodes.push_back(node);
        }
        out.model.trees.push_back(std::move(tree));
    }
    out.standardizer = read_standardizer(doc);
    return out;
}

std::string peek_model_kind(const std::string& path) {
    return read_document(path).at("kind").get<std::string>();
}

}  // namespace tnr

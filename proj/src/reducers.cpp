#include "tnr/reducers.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

#include "tnr/rng.hpp"

namespace tnr {

const char* reducer_kind_name(ReducerKind kind) {
    switch (kind) {
        case ReducerKind::Tnn: return "tnn";
        case ReducerKind::Pca: return "pca";
        case ReducerKind::Rp: return "rp";
        case ReducerKind::Ae: return "ae";
    }
    return "unknown";
}

ReducerKind reducer_kind_from_name(const std::string& name) {
    if (name == "tnn") return ReducerKind::Tnn;
    if (name == "pca") return ReducerKind::Pca;
    if (name == "rp") return ReducerKind::Rp;
    if (name == "ae") return ReducerKind::Ae;
    throw Error(ErrorCode::InvalidConfig, "unknown reducer kind '" + name + "'");
}

Eigen::MatrixXd PcaModel::transform(const Eigen::MatrixXd& X) const {
    if (X.cols() != input_dim()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "PCA fit on " + std::to_string(input_dim()) + " columns, input has " + std::to_string(X.cols()));
    }
    return (X.rowwise() - mean.transpose()) * components.transpose();
}

Eigen::MatrixXd PcaModel::reconstruct(const Eigen::MatrixXd& Z) const {
    if (Z.cols() != output_dim()) {
        throw Error(ErrorCode::DimensionMismatch, "embedding dim mismatch in reconstruct");
    }
    return (Z * components).rowwise() + mean.transpose();
}

PcaModel fit_pca(const Eigen::MatrixXd& X, Eigen::Index k) {
    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    if (n < 2) {
        throw Error(ErrorCode::DegenerateData, "PCA needs at least 2 rows");
    }
    if (k < 1 || k > std::min(n - 1, d)) {
        throw Error(ErrorCode::InvalidDims,
                    "k=" + std::to_string(k) + " not in [1, min(n-1, d)=" + std::to_string(std::min(n - 1, d)) + "]");
    }

    PcaModel model;
    model.mean = X.colwise().mean().transpose();
    const Eigen::MatrixXd centered = X.rowwise() - model.mean.transpose();

    // SVD of the centered data; right singular vectors are the components and
    // sigma^2 / (n - 1) the explained variance.
    Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
    const auto& singular = svd.singularValues();

    model.components.resize(k, d);
    model.explained_variance.resize(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        Eigen::VectorXd component = svd.matrixV().col(i);
        // Deterministic sign: largest-magnitude entry positive.
        Eigen::Index arg_max = 0;
        component.cwiseAbs().maxCoeff(&arg_max);
        if (component(arg_max) < 0.0) {
            component = -component;
        }
        model.components.row(i) = component.transpose();
        model.explained_variance(i) =
            singular(i) * singular(i) / static_cast<double>(n - 1);
    }
    return model;
}

Eigen::MatrixXd RpModel::transform(const Eigen::MatrixXd& X) const {
    if (X.cols() != input_dim()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "projection fit on " + std::to_string(input_dim()) + " columns, input has " +
                        std::to_string(X.cols()));
    }
    return X * projection.transpose();
}

RpModel fit_random_projection(Eigen::Index d, Eigen::Index k, std::uint64_t seed) {
    if (k < 1 || k > d) {
        throw Error(ErrorCode::InvalidDims, "k=" + std::to_string(k) + " not in [1, d=" + std::to_string(d) + "]");
    }
    RpModel model;
    model.seed = seed;
    model.projection.resize(k, d);
    Rng rng(seed);
    const double scale = 1.0 / std::sqrt(static_cast<double>(k));
    for (Eigen::Index j = 0; j < d; ++j) {
        for (Eigen::Index i = 0; i < k; ++i) {
            model.projection(i, j) = scale * rng.normal();
        }
    }
    return model;
}

Reducer Reducer::pca(PcaModel model) {
    return {ReducerKind::Pca, std::move(model)};
}

Reducer Reducer::random_projection(RpModel model) {
    return {ReducerKind::Rp, std::move(model)};
}

Reducer Reducer::triplet_network(EmbeddingModel model) {
    return {ReducerKind::Tnn, std::move(model.layer)};
}

Reducer Reducer::autoencoder(AutoencoderModel model) {
    return {ReducerKind::Ae, std::move(model.encoder)};
}

Eigen::Index Reducer::input_dim() const {
    return std::visit([](const auto& m) { return m.input_dim(); }, state_);
}

Eigen::Index Reducer::output_dim() const {
    return std::visit([](const auto& m) { return m.output_dim(); }, state_);
}

Eigen::MatrixXd Reducer::transform(const Eigen::MatrixXd& X) const {
    if (const auto* layer = std::get_if<DenseLayer>(&state_)) {
        return layer->forward_batch(X);
    }
    if (const auto* pca = std::get_if<PcaModel>(&state_)) {
        return pca->transform(X);
    }
    return std::get<RpModel>(state_).transform(X);
}

const PcaModel& Reducer::as_pca() const {
    if (kind_ != ReducerKind::Pca) throw Error(ErrorCode::InvalidConfig, "reducer is not PCA");
    return std::get<PcaModel>(state_);
}

const RpModel& Reducer::as_rp() const {
    if (kind_ != ReducerKind::Rp) throw Error(ErrorCode::InvalidConfig, "reducer is not RP");
    return std::get<RpModel>(state_);
}

const DenseLayer& Reducer::encoder_layer() const {
    if (const auto* layer = std::get_if<DenseLayer>(&state_)) {
        return *layer;
    }
    throw Error(ErrorCode::InvalidConfig, "reducer has no encoder layer");
}

}  // namespace tnr

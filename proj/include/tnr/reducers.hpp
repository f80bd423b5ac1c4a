#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <variant>

#include "tnr/error.hpp"
#include "tnr/network.hpp"

namespace tnr {

enum class ReducerKind { Tnn, Pca, Rp, Ae };

const char* reducer_kind_name(ReducerKind kind);
ReducerKind reducer_kind_from_name(const std::string& name);

// Principal components of the centered data, ordered by decreasing explained
// variance (sample n-1 convention). Component rows are orthonormal with the
// largest-magnitude entry of each made positive.
struct PcaModel {
    Eigen::VectorXd mean;                // d
    Eigen::MatrixXd components;          // k x d
    Eigen::VectorXd explained_variance;  // k, nonincreasing

    Eigen::Index input_dim() const { return components.cols(); }
    Eigen::Index output_dim() const { return components.rows(); }
    Eigen::MatrixXd transform(const Eigen::MatrixXd& X) const;
    Eigen::MatrixXd reconstruct(const Eigen::MatrixXd& Z) const;
};

// Gaussian projection with entries i.i.d. Normal(0, 1/k); data independent.
struct RpModel {
    Eigen::MatrixXd projection;  // k x d
    std::uint64_t seed = 0;

    Eigen::Index input_dim() const { return projection.cols(); }
    Eigen::Index output_dim() const { return projection.rows(); }
    Eigen::MatrixXd transform(const Eigen::MatrixXd& X) const;
};

PcaModel fit_pca(const Eigen::MatrixXd& X, Eigen::Index k);
RpModel fit_random_projection(Eigen::Index d, Eigen::Index k, std::uint64_t seed);

// A fitted dimensionality reducer of any kind behind one transform surface.
class Reducer {
public:
    static Reducer pca(PcaModel model);
    static Reducer random_projection(RpModel model);
    static Reducer triplet_network(EmbeddingModel model);
    static Reducer autoencoder(AutoencoderModel model);

    ReducerKind kind() const { return kind_; }
    Eigen::Index input_dim() const;
    Eigen::Index output_dim() const;
    Eigen::MatrixXd transform(const Eigen::MatrixXd& X) const;

    const PcaModel& as_pca() const;
    const RpModel& as_rp() const;
    const DenseLayer& encoder_layer() const;

private:
    Reducer(ReducerKind kind, std::variant<PcaModel, RpModel, DenseLayer> state)
        : kind_(kind), state_(std::move(state)) {}

    ReducerKind kind_;
    std::variant<PcaModel, RpModel, DenseLayer> state_;
};

}  // namespace tnr

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "tnr/data.hpp"
#include "tnr/error.hpp"
#include "tnr/triplets.hpp"

namespace tnr {

enum class Activation { ReLU, Linear };

struct DenseLayer {
    Eigen::MatrixXd weights;  // output_dim x input_dim
    Eigen::VectorXd biases;   // output_dim
    Activation activation = Activation::ReLU;

    Eigen::Index input_dim() const { return weights.cols(); }
    Eigen::Index output_dim() const { return weights.rows(); }

    Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
    // Row-wise forward over an n x input_dim batch.
    Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& X) const;
};

// Uniform init in (-sqrt(6/fan_in), sqrt(6/fan_in)) for ReLU layers,
// (-sqrt(6/(fan_in+fan_out)), ...) for linear layers. Biases start at zero.
DenseLayer init_dense_layer(Eigen::Index input_dim, Eigen::Index output_dim, Activation activation,
                            std::uint64_t seed);

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Moment accumulators for one flat parameter array.
struct AdamState {
    AdamConfig config;
    long step_count = 0;
    Eigen::ArrayXd first_moment;   // sized on first step
    Eigen::ArrayXd second_moment;

    explicit AdamState(const AdamConfig& cfg = {}) : config(cfg) {}
};

// Standard bias-corrected Adam update, in place.
void adam_step(AdamState& state, Eigen::Ref<Eigen::ArrayXd> params,
               const Eigen::Ref<const Eigen::ArrayXd>& grads);

// Per-epoch progress hook: (epoch index, metric value).
using ProgressFn = std::function<void(int, double)>;

struct TnnTrainConfig {
    int embedding_dim = 600;
    std::size_t triplets_per_round = 50000;
    int epochs_per_round = 10;
    int rounds = 25;
    int batch_size = 128;
    double margin = 0.2;
    double learning_rate = 1e-5;
    std::uint64_t seed = 0;

    void validate() const;
};

// Single shared-weight embedding layer trained with the triplet loss.
struct EmbeddingModel {
    DenseLayer layer;
    std::vector<double> training_log;  // mean triplet loss per epoch, evaluated after the epoch's updates

    Eigen::Index input_dim() const { return layer.input_dim(); }
    Eigen::Index output_dim() const { return layer.output_dim(); }
};

struct AeTrainConfig {
    int embedding_dim = 600;
    int epochs = 100;
    int batch_size = 32;
    double learning_rate = 3e-3;
    std::uint64_t seed = 0;
    bool early_stop = true;
    double early_stop_rel_improvement = 1e-5;
    int early_stop_window = 10;

    void validate(Eigen::Index feature_dim) const;
};

struct AutoencoderModel {
    DenseLayer encoder;  // ReLU, embedding_dim units
    DenseLayer decoder;  // Linear, feature_dim units
    std::vector<double> training_log;  // per-element reconstruction MSE per epoch

    Eigen::Index input_dim() const { return encoder.input_dim(); }
    Eigen::Index output_dim() const { return encoder.output_dim(); }
};

// Mean triplet loss of a batch pushed through `layer` three ways, with its
// gradient w.r.t. the shared weights. This is the training step's math,
// exposed so gradient checks exercise the real code path.
struct TnnBatchGradient {
    double mean_loss = 0.0;
    Eigen::MatrixXd grad_weights;
    Eigen::VectorXd grad_biases;
};
TnnBatchGradient tnn_batch_gradient(const DenseLayer& layer, const Eigen::MatrixXd& anchors,
                                    const Eigen::MatrixXd& positives, const Eigen::MatrixXd& negatives,
                                    double margin);

// Per-element reconstruction MSE of a batch and its gradients.
struct AeBatchGradient {
    double mse = 0.0;
    Eigen::MatrixXd grad_encoder_weights;
    Eigen::VectorXd grad_encoder_biases;
    Eigen::MatrixXd grad_decoder_weights;
    Eigen::VectorXd grad_decoder_biases;
};
AeBatchGradient ae_batch_gradient(const DenseLayer& encoder, const DenseLayer& decoder,
                                  const Eigen::MatrixXd& X);

// Trains the triplet network: each round mines a fresh triplet set, then runs
// `epochs_per_round` epochs of shuffled mini-batch Adam on the mean triplet
// loss. Features are expected standardized and labels normalized.
EmbeddingModel train_tnn(const FeatureMatrix& features, const Eigen::VectorXd& labels,
                         const MiningConfig& mining, const TnnTrainConfig& config,
                         const ProgressFn& progress = nullptr);

// Seed train_tnn passes to mine_triplets in a given round, so the exact
// triplet sets a training run saw can be regenerated.
std::uint64_t tnn_round_mining_seed(std::uint64_t seed, int round);

// Minimizes mean squared reconstruction error with Adam; stops early once the
// MSE improvement over `early_stop_window` epochs drops below the threshold.
AutoencoderModel train_autoencoder(const FeatureMatrix& features, const AeTrainConfig& config,
                                   const ProgressFn& progress = nullptr);
AutoencoderModel train_autoencoder(const FeatureMatrix& features, int k, int epochs, std::uint64_t seed);

// Row-wise embedding of X through the model's layer (encoder for AE).
Eigen::MatrixXd embed(const EmbeddingModel& model, const Eigen::MatrixXd& X);
Eigen::MatrixXd embed(const AutoencoderModel& model, const Eigen::MatrixXd& X);

// Mean triplet loss of fixed embeddings over a triplet set.
double mean_triplet_loss(const Eigen::MatrixXd& embeddings, const std::vector<Triplet>& triplets,
                         double margin);

}  // namespace tnr

#include "tnr/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tnr/rng.hpp"

namespace tnr {

namespace {

// Stream tags so init, mining, and shuffling draw from unrelated sequences.
constexpr std::uint64_t kInitStream = 0x1a2b3c01;
constexpr std::uint64_t kMiningStream = 0x1a2b3c02;
constexpr std::uint64_t kShuffleStream = 0x1a2b3c03;

Eigen::Map<Eigen::ArrayXd> flat(Eigen::MatrixXd& m) {
    return {m.data(), m.size()};
}

Eigen::Map<const Eigen::ArrayXd> flat(const Eigen::MatrixXd& m) {
    return {m.data(), m.size()};
}

Eigen::Map<Eigen::ArrayXd> flat(Eigen::VectorXd& v) {
    return {v.data(), v.size()};
}

Eigen::Map<const Eigen::ArrayXd> flat(const Eigen::VectorXd& v) {
    return {v.data(), v.size()};
}

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& X, const std::vector<Eigen::Index>& idx,
                            std::size_t begin, std::size_t end) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(end - begin), X.cols());
    for (std::size_t i = begin; i < end; ++i) {
        out.row(static_cast<Eigen::Index>(i - begin)) = X.row(idx[i]);
    }
    return out;
}

}  // namespace

Eigen::VectorXd DenseLayer::forward(const Eigen::VectorXd& x) const {
    if (x.size() != input_dim()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "layer expects " + std::to_string(input_dim()) + " inputs, got " + std::to_string(x.size()));
    }
    Eigen::VectorXd z = weights * x + biases;
    if (activation == Activation::ReLU) {
        z = z.cwiseMax(0.0);
    }
    return z;
}

Eigen::MatrixXd DenseLayer::forward_batch(const Eigen::MatrixXd& X) const {
    if (X.cols() != input_dim()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "layer expects " + std::to_string(input_dim()) + " inputs, got " + std::to_string(X.cols()));
    }
    Eigen::MatrixXd Z = (X * weights.transpose()).rowwise() + biases.transpose();
    if (activation == Activation::ReLU) {
        Z = Z.cwiseMax(0.0);
    }
    return Z;
}

DenseLayer init_dense_layer(Eigen::Index input_dim, Eigen::Index output_dim, Activation activation,
                            std::uint64_t seed) {
    if (input_dim < 1 || output_dim < 1) {
        throw Error(ErrorCode::InvalidDims,
                    "layer dims " + std::to_string(input_dim) + " -> " + std::to_string(output_dim));
    }
    const double limit = activation == Activation::ReLU
                             ? std::sqrt(6.0 / static_cast<double>(input_dim))
                             : std::sqrt(6.0 / static_cast<double>(input_dim + output_dim));
    DenseLayer layer;
    layer.activation = activation;
    layer.weights.resize(output_dim, input_dim);
    layer.biases = Eigen::VectorXd::Zero(output_dim);
    Rng rng(seed);
    for (Eigen::Index j = 0; j < input_dim; ++j) {
        for (Eigen::Index i = 0; i < output_dim; ++i) {
            layer.weights(i, j) = rng.uniform(-limit, limit);
        }
    }
    return layer;
}

void adam_step(AdamState& state, Eigen::Ref<Eigen::ArrayXd> params,
               const Eigen::Ref<const Eigen::ArrayXd>& grads) {
    if (params.size() != grads.size()) {
        throw Error(ErrorCode::ShapeMismatch,
                    "params size " + std::to_string(params.size()) + " vs grads " + std::to_string(grads.size()));
    }
    if (state.first_moment.size() == 0) {
        state.first_moment = Eigen::ArrayXd::Zero(params.size());
        state.second_moment = Eigen::ArrayXd::Zero(params.size());
    } else if (state.first_moment.size() != params.size()) {
        throw Error(ErrorCode::ShapeMismatch, "Adam state was created for a different parameter count");
    }
    const auto& cfg = state.config;
    state.step_count += 1;
    const auto t = static_cast<double>(state.step_count);
    state.first_moment = cfg.beta1 * state.first_moment + (1.0 - cfg.beta1) * grads;
    state.second_moment = cfg.beta2 * state.second_moment + (1.0 - cfg.beta2) * grads.square();
    const double correction1 = 1.0 - std::pow(cfg.beta1, t);
    const double correction2 = 1.0 - std::pow(cfg.beta2, t);
    params -= cfg.learning_rate * (state.first_moment / correction1) /
              ((state.second_moment / correction2).sqrt() + cfg.epsilon);
}

void TnnTrainConfig::validate() const {
    if (embedding_dim < 1 || triplets_per_round < 1 || epochs_per_round < 1 || rounds < 1 || batch_size < 1) {
        throw Error(ErrorCode::InvalidConfig, "all TNN training counts must be positive");
    }
    if (!(margin > 0.0) || !std::isfinite(margin)) {
        throw Error(ErrorCode::InvalidConfig, "margin must be finite and positive");
    }
    if (!(learning_rate > 0.0)) {
        throw Error(ErrorCode::InvalidConfig, "learning rate must be positive");
    }
}

void AeTrainConfig::validate(Eigen::Index feature_dim) const {
    if (embedding_dim < 1 || embedding_dim > feature_dim) {
        throw Error(ErrorCode::InvalidDims,
                    "embedding_dim " + std::to_string(embedding_dim) + " not in [1, " + std::to_string(feature_dim) + "]");
    }
    if (epochs < 0 || batch_size < 1 || !(learning_rate > 0.0)) {
        throw Error(ErrorCode::InvalidConfig, "bad autoencoder training config");
    }
}

double mean_triplet_loss(const Eigen::MatrixXd& embeddings, const std::vector<Triplet>& triplets,
                         double margin) {
    double total = 0.0;
    for (const auto& t : triplets) {
        const double d_ap = (embeddings.row(t.anchor) - embeddings.row(t.positive)).squaredNorm();
        const double d_an = (embeddings.row(t.anchor) - embeddings.row(t.negative)).squaredNorm();
        total += std::max(d_ap - d_an + margin, 0.0);
    }
    return total / static_cast<double>(triplets.size());
}

TnnBatchGradient tnn_batch_gradient(const DenseLayer& layer, const Eigen::MatrixXd& anchors,
                                    const Eigen::MatrixXd& positives, const Eigen::MatrixXd& negatives,
                                    double margin) {
    if (anchors.rows() != positives.rows() || anchors.rows() != negatives.rows()) {
        throw Error(ErrorCode::ShapeMismatch, "triplet batch row counts differ");
    }
    const auto batch = anchors.rows();
    const Eigen::MatrixXd& W = layer.weights;
    const Eigen::VectorXd& b = layer.biases;

    const Eigen::MatrixXd Za = (anchors * W.transpose()).rowwise() + b.transpose();
    const Eigen::MatrixXd Zp = (positives * W.transpose()).rowwise() + b.transpose();
    const Eigen::MatrixXd Zn = (negatives * W.transpose()).rowwise() + b.transpose();
    const Eigen::MatrixXd A = Za.cwiseMax(0.0);
    const Eigen::MatrixXd P = Zp.cwiseMax(0.0);
    const Eigen::MatrixXd N = Zn.cwiseMax(0.0);

    const Eigen::ArrayXd d_ap = (A - P).rowwise().squaredNorm().array();
    const Eigen::ArrayXd d_an = (A - N).rowwise().squaredNorm().array();
    const Eigen::ArrayXd hinge = (d_ap - d_an + margin).max(0.0);
    // Mean-reduced hinge; inactive triplets contribute no gradient.
    const Eigen::ArrayXd active =
        ((d_ap - d_an + margin) > 0.0).cast<double>() * (2.0 / static_cast<double>(batch));

    Eigen::MatrixXd dA = ((N - P).array().colwise() * active).matrix();
    Eigen::MatrixXd dP = ((P - A).array().colwise() * active).matrix();
    Eigen::MatrixXd dN = ((A - N).array().colwise() * active).matrix();

    dA.array() *= (Za.array() > 0.0).cast<double>();
    dP.array() *= (Zp.array() > 0.0).cast<double>();
    dN.array() *= (Zn.array() > 0.0).cast<double>();

    TnnBatchGradient out;
    out.mean_loss = hinge.mean();
    out.grad_weights = dA.transpose() * anchors + dP.transpose() * positives + dN.transpose() * negatives;
    out.grad_biases = (dA.colwise().sum() + dP.colwise().sum() + dN.colwise().sum()).transpose();
    return out;
}

AeBatchGradient ae_batch_gradient(const DenseLayer& encoder, const DenseLayer& decoder,
                                  const Eigen::MatrixXd& X) {
    const auto batch = X.rows();
    const auto d = X.cols();
    const Eigen::MatrixXd Z1 = (X * encoder.weights.transpose()).rowwise() + encoder.biases.transpose();
    const Eigen::MatrixXd H = Z1.cwiseMax(0.0);
    const Eigen::MatrixXd Y = (H * decoder.weights.transpose()).rowwise() + decoder.biases.transpose();

    const Eigen::MatrixXd R = Y - X;
    const double scale = 2.0 / static_cast<double>(batch * d);
    const Eigen::MatrixXd dY = scale * R;

    AeBatchGradient out;
    out.mse = R.squaredNorm() / static_cast<double>(batch * d);
    out.grad_decoder_weights = dY.transpose() * H;
    out.grad_decoder_biases = dY.colwise().sum().transpose();
    Eigen::MatrixXd dH = dY * decoder.weights;
    dH.array() *= (Z1.array() > 0.0).cast<double>();
    out.grad_encoder_weights = dH.transpose() * X;
    out.grad_encoder_biases = dH.colwise().sum().transpose();
    return out;
}

std::uint64_t tnn_round_mining_seed(std::uint64_t seed, int round) {
    return mix_seed(seed, kMiningStream, static_cast<std::uint64_t>(round));
}

EmbeddingModel train_tnn(const FeatureMatrix& features, const Eigen::VectorXd& labels,
                         const MiningConfig& mining, const TnnTrainConfig& config,
                         const ProgressFn& progress) {
    config.validate();
    mining.validate();
    if (labels.size() != features.rows()) {
        throw Error(ErrorCode::ShapeMismatch,
                    std::to_string(features.rows()) + " feature rows vs " + std::to_string(labels.size()) + " labels");
    }

    const Eigen::Index d = features.cols();
    const Eigen::Index k = config.embedding_dim;
    const Eigen::MatrixXd& X = features.values;

    EmbeddingModel model;
    model.layer = init_dense_layer(d, k, Activation::ReLU, mix_seed(config.seed, kInitStream));
    model.training_log.reserve(static_cast<std::size_t>(config.rounds) * config.epochs_per_round);

    AdamConfig adam_cfg;
    adam_cfg.learning_rate = config.learning_rate;
    AdamState weight_state(adam_cfg);
    AdamState bias_state(adam_cfg);

    Rng shuffle_rng(mix_seed(config.seed, kShuffleStream));
    Eigen::MatrixXd& W = model.layer.weights;
    Eigen::VectorXd& b = model.layer.biases;

    int epoch_index = 0;
    for (int round = 0; round < config.rounds; ++round) {
        const auto triplets =
            mine_triplets(labels, config.triplets_per_round, mining, tnn_round_mining_seed(config.seed, round));

        std::vector<std::size_t> order(triplets.size());
        std::iota(order.begin(), order.end(), 0);

        for (int epoch = 0; epoch < config.epochs_per_round; ++epoch) {
            shuffle_rng.shuffle(order);

            for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
                const std::size_t stop = std::min(order.size(), start + config.batch_size);
                const auto batch = static_cast<Eigen::Index>(stop - start);

                std::vector<Eigen::Index> ia(batch), ip(batch), in(batch);
                for (std::size_t i = start; i < stop; ++i) {
                    const auto& t = triplets[order[i]];
                    ia[i - start] = t.anchor;
                    ip[i - start] = t.positive;
                    in[i - start] = t.negative;
                }
                const Eigen::MatrixXd Xa = gather_rows(X, ia, 0, ia.size());
                const Eigen::MatrixXd Xp = gather_rows(X, ip, 0, ip.size());
                const Eigen::MatrixXd Xn = gather_rows(X, in, 0, in.size());

                const TnnBatchGradient grad = tnn_batch_gradient(model.layer, Xa, Xp, Xn, config.margin);
                adam_step(weight_state, flat(W), flat(grad.grad_weights));
                adam_step(bias_state, flat(b), flat(grad.grad_biases));
            }

            // Epoch metric: loss over the current triplet set with the
            // weights as they stand after this epoch's updates.
            const Eigen::MatrixXd E = model.layer.forward_batch(X);
            const double epoch_loss = mean_triplet_loss(E, triplets, config.margin);
            if (!std::isfinite(epoch_loss)) {
                throw Error(ErrorCode::NonFiniteLoss, "epoch " + std::to_string(epoch_index));
            }
            model.training_log.push_back(epoch_loss);
            if (progress) progress(epoch_index, epoch_loss);
            ++epoch_index;
        }
    }
    return model;
}

AutoencoderModel train_autoencoder(const FeatureMatrix& features, const AeTrainConfig& config,
                                   const ProgressFn& progress) {
    const Eigen::Index d = features.cols();
    const Eigen::Index n = features.rows();
    config.validate(d);
    const Eigen::Index k = config.embedding_dim;
    const Eigen::MatrixXd& X = features.values;

    AutoencoderModel model;
    model.encoder = init_dense_layer(d, k, Activation::ReLU, mix_seed(config.seed, kInitStream, 1));
    model.decoder = init_dense_layer(k, d, Activation::Linear, mix_seed(config.seed, kInitStream, 2));

    AdamConfig adam_cfg;
    adam_cfg.learning_rate = config.learning_rate;
    AdamState enc_w(adam_cfg), enc_b(adam_cfg), dec_w(adam_cfg), dec_b(adam_cfg);

    Rng shuffle_rng(mix_seed(config.seed, kShuffleStream, 1));
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);

    Eigen::MatrixXd& W1 = model.encoder.weights;
    Eigen::VectorXd& b1 = model.encoder.biases;
    Eigen::MatrixXd& W2 = model.decoder.weights;
    Eigen::VectorXd& b2 = model.decoder.biases;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t stop = std::min(order.size(), start + config.batch_size);
            const Eigen::MatrixXd Xb = gather_rows(X, order, start, stop);

            const AeBatchGradient grad = ae_batch_gradient(model.encoder, model.decoder, Xb);
            adam_step(dec_w, flat(W2), flat(grad.grad_decoder_weights));
            adam_step(dec_b, flat(b2), flat(grad.grad_decoder_biases));
            adam_step(enc_w, flat(W1), flat(grad.grad_encoder_weights));
            adam_step(enc_b, flat(b1), flat(grad.grad_encoder_biases));
        }

        const Eigen::MatrixXd recon = model.decoder.forward_batch(model.encoder.forward_batch(X));
        const double mse = (recon - X).squaredNorm() / static_cast<double>(n * d);
        if (!std::isfinite(mse)) {
            throw Error(ErrorCode::NonFiniteLoss, "epoch " + std::to_string(epoch));
        }
        model.training_log.push_back(mse);
        if (progress) progress(epoch, mse);

        if (config.early_stop && epoch + 1 >= config.early_stop_window + 1) {
            const double before = model.training_log[model.training_log.size() - 1 - config.early_stop_window];
            const double improvement = (before - mse) / std::max(std::abs(before), 1e-30);
            if (improvement < config.early_stop_rel_improvement) {
                break;
            }
        }
    }
    return model;
}

AutoencoderModel train_autoencoder(const FeatureMatrix& features, int k, int epochs, std::uint64_t seed) {
    AeTrainConfig config;
    config.embedding_dim = k;
    config.epochs = epochs;
    config.seed = seed;
    return train_autoencoder(features, config);
}

Eigen::MatrixXd embed(const EmbeddingModel& model, const Eigen::MatrixXd& X) {
    return model.layer.forward_batch(X);
}

Eigen::MatrixXd embed(const AutoencoderModel& model, const Eigen::MatrixXd& X) {
    return model.encoder.forward_batch(X);
}

}  // namespace tnr

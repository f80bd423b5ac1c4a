#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "tnr/error.hpp"

namespace tnr {

struct GbmConfig {
    int n_trees = 100;
    int max_depth = 3;
    double learning_rate = 0.1;
    int min_samples_leaf = 1;
    std::uint64_t seed = 0;  // reserved for tie-breaking; splits are fully deterministic

    void validate() const {
        if (n_trees < 0 || max_depth < 0 || min_samples_leaf < 1 ||
            !(learning_rate > 0.0 && learning_rate <= 1.0)) {
            throw Error(ErrorCode::InvalidConfig, "bad GBM config");
        }
    }
};

// Axis-aligned regression tree with constant leaves, stored as a flat array.
struct TreeNode {
    int feature = -1;        // -1 marks a leaf
    double threshold = 0.0;  // x[feature] < threshold goes left
    int left = -1;
    int right = -1;
    double value = 0.0;      // leaf prediction
};

struct RegressionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    double predict_row(const Eigen::RowVectorXd& x) const;
    Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
};

struct GbmModel {
    double base_prediction = 0.0;  // training-label mean
    double learning_rate = 0.1;
    std::vector<RegressionTree> trees;
};

// Candidate split of a sample set: midpoint threshold with the largest sum-of-
// squared-error reduction; ties break toward the lowest feature index, then
// the lowest threshold.
struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double sse_reduction = 0.0;
};

SplitChoice best_split(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const std::vector<Eigen::Index>& samples, int min_samples_leaf);

// Stagewise least-squares boosting: each tree fits the residuals of the
// current ensemble with greedy variance-reduction splits.
GbmModel fit_gbm(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const GbmConfig& config);

Eigen::VectorXd predict_gbm(const GbmModel& model, const Eigen::MatrixXd& X);

}  // namespace tnr

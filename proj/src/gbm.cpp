#include "tnr/gbm.hpp"

#include <algorithm>
#include <numeric>

namespace tnr {

double RegressionTree::predict_row(const Eigen::RowVectorXd& x) const {
    int node = 0;
    while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
        const auto& nd = nodes[static_cast<std::size_t>(node)];
        node = x(nd.feature) < nd.threshold ? nd.left : nd.right;
    }
    return nodes[static_cast<std::size_t>(node)].value;
}

Eigen::VectorXd RegressionTree::predict(const Eigen::MatrixXd& X) const {
    Eigen::VectorXd out(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        out(i) = predict_row(X.row(i));
    }
    return out;
}

SplitChoice best_split(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const std::vector<Eigen::Index>& samples, int min_samples_leaf) {
    SplitChoice best;
    const auto count = static_cast<Eigen::Index>(samples.size());
    if (count < 2 * min_samples_leaf) {
        return best;
    }

    double total_sum = 0.0;
    for (const auto s : samples) total_sum += y(s);

    std::vector<Eigen::Index> order(samples);
    for (int f = 0; f < X.cols(); ++f) {
        std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
            if (X(a, f) != X(b, f)) return X(a, f) < X(b, f);
            return a < b;
        });

        // Scan split positions left-to-right with running sums; SSE reduction
        // is (sumL^2/nL + sumR^2/nR - sum^2/n), independent of Sum(y^2).
        double left_sum = 0.0;
        for (Eigen::Index pos = 0; pos + 1 < count; ++pos) {
            left_sum += y(order[static_cast<std::size_t>(pos)]);
            const double x_here = X(order[static_cast<std::size_t>(pos)], f);
            const double x_next = X(order[static_cast<std::size_t>(pos + 1)], f);
            if (x_here == x_next) continue;

            const Eigen::Index n_left = pos + 1;
            const Eigen::Index n_right = count - n_left;
            if (n_left < min_samples_leaf || n_right < min_samples_leaf) continue;

            const double right_sum = total_sum - left_sum;
            const double reduction = left_sum * left_sum / static_cast<double>(n_left) +
                                     right_sum * right_sum / static_cast<double>(n_right) -
                                     total_sum * total_sum / static_cast<double>(count);
            if (reduction > best.sse_reduction) {
                best.found = true;
                best.feature = f;
                best.threshold = 0.5 * (x_here + x_next);
                best.sse_reduction = reduction;
            }
        }
    }
    return best;
}

namespace {

int build_node(RegressionTree& tree, const Eigen::MatrixXd& X, const Eigen::VectorXd& residuals,
               std::vector<Eigen::Index>& samples, int depth, const GbmConfig& config) {
    double sum = 0.0;
    for (const auto s : samples) sum += residuals(s);
    const double mean = sum / static_cast<double>(samples.size());

    const int index = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(TreeNode{});
    tree.nodes[static_cast<std::size_t>(index)].value = mean;

    if (depth >= config.max_depth) {
        return index;
    }
    const SplitChoice split = best_split(X, residuals, samples, config.min_samples_leaf);
    if (!split.found || split.sse_reduction <= 0.0) {
        return index;
    }

    std::vector<Eigen::Index> left, right;
    left.reserve(samples.size());
    right.reserve(samples.size());
    for (const auto s : samples) {
        (X(s, split.feature) < split.threshold ? left : right).push_back(s);
    }
    samples.clear();
    samples.shrink_to_fit();

    const int left_index = build_node(tree, X, residuals, left, depth + 1, config);
    const int right_index = build_node(tree, X, residuals, right, depth + 1, config);
    auto& node = tree.nodes[static_cast<std::size_t>(index)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = left_index;
    node.right = right_index;
    return index;
}

}  // namespace

GbmModel fit_gbm(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const GbmConfig& config) {
    config.validate();
    if (X.rows() < 1) {
        throw Error(ErrorCode::DegenerateData, "GBM needs at least 1 sample");
    }
    if (y.size() != X.rows()) {
        throw Error(ErrorCode::ShapeMismatch,
                    std::to_string(X.rows()) + " rows vs " + std::to_string(y.size()) + " targets");
    }

    GbmModel model;
    model.base_prediction = y.mean();
    model.learning_rate = config.learning_rate;
    model.trees.reserve(static_cast<std::size_t>(config.n_trees));

    Eigen::VectorXd prediction = Eigen::VectorXd::Constant(X.rows(), model.base_prediction);
    for (int t = 0; t < config.n_trees; ++t) {
        const Eigen::VectorXd residuals = y - prediction;
        RegressionTree tree;
        std::vector<Eigen::Index> all(static_cast<std::size_t>(X.rows()));
        std::iota(all.begin(), all.end(), 0);
        build_node(tree, X, residuals, all, 0, config);
        prediction += config.learning_rate * tree.predict(X);
        model.trees.push_back(std::move(tree));
    }
    return model;
}

Eigen::VectorXd predict_gbm(const GbmModel& model, const Eigen::MatrixXd& X) {
    Eigen::VectorXd out = Eigen::VectorXd::Constant(X.rows(), model.base_prediction);
    for (const auto& tree : model.trees) {
        out += model.learning_rate * tree.predict(X);
    }
    return out;
}

}  // namespace tnr

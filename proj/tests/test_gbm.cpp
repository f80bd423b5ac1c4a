#include <doctest.h>

#include <cmath>
#include <numeric>

#include "tnr/gbm.hpp"
#include "testutil.hpp"

using namespace tnr;

TEST_CASE("gbm with zero trees predicts the training mean") {
    tnr::Rng rng(60);
    const Eigen::MatrixXd X = testutil::random_matrix(15, 3, rng);
    Eigen::VectorXd y(15);
    for (Eigen::Index i = 0; i < 15; ++i) y(i) = X(i, 0) + 0.5;

    GbmConfig config;
    config.n_trees = 0;
    const GbmModel model = fit_gbm(X, y, config);
    const Eigen::VectorXd pred = predict_gbm(model, X);
    for (Eigen::Index i = 0; i < 15; ++i) {
        CHECK(pred(i) == doctest::Approx(y.mean()));
    }
}

TEST_CASE("one fully grown tree with lr=1 interpolates distinct rows") {
    tnr::Rng rng(61);
    const Eigen::MatrixXd X = testutil::random_matrix(12, 2, rng);
    const Eigen::VectorXd y = testutil::random_vector(12, rng);

    GbmConfig config;
    config.n_trees = 1;
    config.learning_rate = 1.0;
    config.max_depth = 12;
    config.min_samples_leaf = 1;
    const GbmModel model = fit_gbm(X, y, config);
    const Eigen::VectorXd pred = predict_gbm(model, X);
    for (Eigen::Index i = 0; i < 12; ++i) {
        CHECK(pred(i) == doctest::Approx(y(i)).epsilon(1e-12));
    }
}

TEST_CASE("training MSE is nonincreasing over boosting rounds") {
    tnr::Rng rng(62);
    const Eigen::MatrixXd X = testutil::random_matrix(40, 3, rng);
    Eigen::VectorXd y(40);
    for (Eigen::Index i = 0; i < 40; ++i) {
        y(i) = std::sin(X(i, 0)) + X(i, 1) * X(i, 2);
    }
    GbmConfig config;
    config.n_trees = 30;
    const GbmModel model = fit_gbm(X, y, config);

    Eigen::VectorXd prediction = Eigen::VectorXd::Constant(40, model.base_prediction);
    double previous = (y - prediction).squaredNorm();
    for (const auto& tree : model.trees) {
        prediction += model.learning_rate * tree.predict(X);
        const double mse = (y - prediction).squaredNorm();
        CHECK(mse <= previous + 1e-10);
        previous = mse;
    }
}

TEST_CASE("greedy split matches the brute-force oracle") {
    tnr::Rng rng(63);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index n = 5 + static_cast<Eigen::Index>(rng.uniform_index(12));  // 5..16
        const Eigen::MatrixXd X = testutil::random_matrix(n, 3, rng);
        const Eigen::VectorXd y = testutil::random_vector(n, rng);
        std::vector<Eigen::Index> samples(static_cast<std::size_t>(n));
        std::iota(samples.begin(), samples.end(), 0);

        const SplitChoice greedy = best_split(X, y, samples, 1);
        const auto oracle = testutil::brute_force_split(X, y, samples, 1);
        REQUIRE(greedy.found == oracle.found);
        if (greedy.found) {
            CHECK(greedy.feature == oracle.feature);
            CHECK(greedy.threshold == oracle.threshold);
            CHECK(greedy.sse_reduction == doctest::Approx(oracle.sse_reduction).epsilon(1e-9));
        }
    }
}

TEST_CASE("depth-1 stump routes by the split threshold") {
    Eigen::MatrixXd X(4, 2);
    X << 0.0, 9.0,
         0.0, 8.0,
         1.0, 7.0,
         1.0, 6.0;
    Eigen::VectorXd y(4);
    y << 0.0, 0.0, 1.0, 1.0;

    GbmConfig config;
    config.n_trees = 1;
    config.max_depth = 1;
    config.learning_rate = 0.4;
    const GbmModel model = fit_gbm(X, y, config);
    REQUIRE(model.trees.size() == 1);
    const auto& root = model.trees[0].nodes[0];
    REQUIRE(root.feature == 0);
    CHECK(root.threshold == doctest::Approx(0.5));

    // base + lr * left-leaf for x0 < 0.5; residual means are -0.5 / +0.5.
    Eigen::MatrixXd query(2, 2);
    query << 0.4, 100.0,
             0.6, -100.0;
    const Eigen::VectorXd pred = predict_gbm(model, query);
    CHECK(pred(0) == doctest::Approx(0.5 + 0.4 * -0.5));
    CHECK(pred(1) == doctest::Approx(0.5 + 0.4 * 0.5));
}

TEST_CASE("prediction is piecewise constant between thresholds") {
    tnr::Rng rng(64);
    const Eigen::MatrixXd X = testutil::random_matrix(20, 2, rng);
    const Eigen::VectorXd y = testutil::random_vector(20, rng);
    GbmConfig config;
    config.n_trees = 5;
    const GbmModel model = fit_gbm(X, y, config);

    Eigen::MatrixXd probe(1, 2);
    probe << 0.31, -0.42;
    const double base = predict_gbm(model, probe)(0);
    // Nudges far smaller than any gap between sampled thresholds.
    probe(0, 0) += 1e-12;
    probe(0, 1) -= 1e-12;
    CHECK(predict_gbm(model, probe)(0) == base);
}

TEST_CASE("min_samples_leaf is honored by every leaf") {
    tnr::Rng rng(65);
    const Eigen::MatrixXd X = testutil::random_matrix(30, 2, rng);
    const Eigen::VectorXd y = testutil::random_vector(30, rng);
    GbmConfig config;
    config.n_trees = 3;
    config.max_depth = 6;
    config.min_samples_leaf = 4;
    const GbmModel model = fit_gbm(X, y, config);

    for (const auto& tree : model.trees) {
        // Count training rows reaching each leaf.
        std::vector<int> counts(tree.nodes.size(), 0);
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            int node = 0;
            while (tree.nodes[static_cast<std::size_t>(node)].feature >= 0) {
                const auto& nd = tree.nodes[static_cast<std::size_t>(node)];
                node = X(i, nd.feature) < nd.threshold ? nd.left : nd.right;
            }
            counts[static_cast<std::size_t>(node)]++;
        }
        for (std::size_t n = 0; n < tree.nodes.size(); ++n) {
            if (tree.nodes[n].feature < 0) {
                CHECK(counts[n] >= config.min_samples_leaf);
            }
        }
    }
}

TEST_CASE("boosting with capacity beats the mean-only baseline on train R2") {
    tnr::Rng rng(66);
    const Eigen::MatrixXd X = testutil::random_matrix(50, 3, rng);
    Eigen::VectorXd y(50);
    for (Eigen::Index i = 0; i < 50; ++i) y(i) = X(i, 0) * 2.0 - X(i, 1);

    GbmConfig rich;
    rich.n_trees = 50;
    const double rich_sse = (y - predict_gbm(fit_gbm(X, y, rich), X)).squaredNorm();

    GbmConfig baseline;
    baseline.n_trees = 0;
    const double base_sse = (y - predict_gbm(fit_gbm(X, y, baseline), X)).squaredNorm();
    CHECK(rich_sse <= base_sse);
}

TEST_CASE("gbm config validation") {
    tnr::Rng rng(67);
    const Eigen::MatrixXd X = testutil::random_matrix(5, 2, rng);
    const Eigen::VectorXd y = testutil::random_vector(5, rng);
    GbmConfig bad;
    bad.learning_rate = 0.0;
    CHECK_THROWS_AS(fit_gbm(X, y, bad), Error);
    bad = GbmConfig{};
    bad.min_samples_leaf = 0;
    CHECK_THROWS_AS(fit_gbm(X, y, bad), Error);
}

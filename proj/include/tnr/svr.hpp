#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "tnr/error.hpp"

namespace tnr {

struct SvrConfig {
    double c = 1.0;
    double epsilon = 0.1;   // insensitive-tube half width, label units
    double gamma = 0.0;     // RBF width; <= 0 selects 1/d
    double tolerance = 1e-3;
    int max_passes = 200;   // each pass allows up to 2n working-pair updates

    void validate() const {
        if (!(c > 0.0) || epsilon < 0.0 || !(tolerance > 0.0) || max_passes < 1) {
            throw Error(ErrorCode::InvalidConfig, "bad SVR config");
        }
    }

    double effective_gamma(Eigen::Index d) const {
        return gamma > 0.0 ? gamma : 1.0 / static_cast<double>(d);
    }
};

// Epsilon-SVR with RBF kernel. Only vectors with nonzero dual coefficient
// are retained. `converged` is false when the solver hit the iteration cap
// before reaching the KKT tolerance.
struct SvrModel {
    Eigen::MatrixXd support_vectors;     // m x d
    Eigen::VectorXd dual_coefficients;   // m, each in [-c, c], sums to ~0
    double bias = 0.0;
    double gamma = 0.0;
    bool converged = true;

    Eigen::Index support_count() const { return dual_coefficients.size(); }
};

// Solves the epsilon-SVR dual with a maximal-violating-pair SMO loop over the
// 2n box variables (alpha, alpha*). The full kernel matrix is precomputed;
// intended for the n <= a few thousand regime this project targets.
SvrModel fit_svr(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const SvrConfig& config);

Eigen::VectorXd predict_svr(const SvrModel& model, const Eigen::MatrixXd& X);

// exp(-gamma * ||a_i - b_j||^2) for all row pairs.
Eigen::MatrixXd rbf_kernel(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double gamma);

}  // namespace tnr

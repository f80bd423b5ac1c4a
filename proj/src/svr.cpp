#include "tnr/svr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace tnr {

Eigen::MatrixXd rbf_kernel(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double gamma) {
    const Eigen::VectorXd a2 = A.rowwise().squaredNorm();
    const Eigen::VectorXd b2 = B.rowwise().squaredNorm();
    Eigen::MatrixXd D = (-2.0 * A * B.transpose());
    D.colwise() += a2;
    D.rowwise() += b2.transpose();
    return (-gamma * D.cwiseMax(0.0)).array().exp();
}

namespace {

constexpr double kTau = 1e-12;  // curvature floor for degenerate pairs

// State of the 2n-variable box problem: z = [alpha; alpha*],
// sign s_t = +1 for t < n and -1 otherwise, gradient G = Q z + p with
// Q_tu = s_t s_u K_{t%n, u%n} and p_t = eps - s_t y_{t%n}.
struct SmoProblem {
    const Eigen::MatrixXd& kernel;
    Eigen::Index n;
    double c;
    Eigen::VectorXd z;
    Eigen::VectorXd grad;

    double sign(Eigen::Index t) const { return t < n ? 1.0 : -1.0; }
    Eigen::Index sample(Eigen::Index t) const { return t < n ? t : t - n; }

    bool in_up_set(Eigen::Index t) const { return t < n ? z(t) < c : z(t) > 0.0; }
    bool in_low_set(Eigen::Index t) const { return t < n ? z(t) > 0.0 : z(t) < c; }
};

}  // namespace

SvrModel fit_svr(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const SvrConfig& config) {
    config.validate();
    const Eigen::Index n = X.rows();
    if (n < 2) {
        throw Error(ErrorCode::DegenerateData, "SVR needs at least 2 samples");
    }
    if (y.size() != n) {
        throw Error(ErrorCode::ShapeMismatch,
                    std::to_string(n) + " rows vs " + std::to_string(y.size()) + " targets");
    }
    if (!X.allFinite() || !y.allFinite()) {
        throw Error(ErrorCode::NonNumericValue, "SVR training data contains non-finite values");
    }

    const double gamma = config.effective_gamma(X.cols());
    const Eigen::MatrixXd K = rbf_kernel(X, X, gamma);

    SmoProblem prob{K, n, config.c, Eigen::VectorXd::Zero(2 * n), Eigen::VectorXd(2 * n)};
    for (Eigen::Index t = 0; t < 2 * n; ++t) {
        prob.grad(t) = config.epsilon - prob.sign(t) * y(prob.sample(t));
    }

    const long max_iterations = static_cast<long>(config.max_passes) * static_cast<long>(2 * n);
    bool converged = false;

    for (long iteration = 0; iteration < max_iterations; ++iteration) {
        // Maximal violating pair.
        double m_up = -std::numeric_limits<double>::infinity();
        double m_low = std::numeric_limits<double>::infinity();
        Eigen::Index i = -1, j = -1;
        for (Eigen::Index t = 0; t < 2 * n; ++t) {
            const double v = -prob.sign(t) * prob.grad(t);
            if (prob.in_up_set(t) && v > m_up) {
                m_up = v;
                i = t;
            }
            if (prob.in_low_set(t) && v < m_low) {
                m_low = v;
                j = t;
            }
        }
        if (i < 0 || j < 0 || m_up - m_low <= config.tolerance) {
            converged = true;
            break;
        }

        const Eigen::Index si = prob.sample(i), sj = prob.sample(j);
        const double old_i = prob.z(i), old_j = prob.z(j);
        const double kii = K(si, si), kjj = K(sj, sj), kij = K(si, sj);

        if (prob.sign(i) != prob.sign(j)) {
            double quad = kii + kjj + 2.0 * kij;  // Q_ii + Q_jj + 2 Q_ij with s_i s_j = -1
            if (quad <= 0.0) quad = kTau;
            const double delta = (-prob.grad(i) - prob.grad(j)) / quad;
            const double diff = prob.z(i) - prob.z(j);
            prob.z(i) += delta;
            prob.z(j) += delta;
            if (diff > 0.0) {
                if (prob.z(j) < 0.0) { prob.z(j) = 0.0; prob.z(i) = diff; }
            } else {
                if (prob.z(i) < 0.0) { prob.z(i) = 0.0; prob.z(j) = -diff; }
            }
            if (diff > 0.0) {
                if (prob.z(i) > prob.c) { prob.z(i) = prob.c; prob.z(j) = prob.c - diff; }
            } else {
                if (prob.z(j) > prob.c) { prob.z(j) = prob.c; prob.z(i) = prob.c + diff; }
            }
        } else {
            double quad = kii + kjj - 2.0 * kij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (prob.grad(i) - prob.grad(j)) / quad;
            const double sum = prob.z(i) + prob.z(j);
            prob.z(i) -= delta;
            prob.z(j) += delta;
            if (sum > prob.c) {
                if (prob.z(i) > prob.c) { prob.z(i) = prob.c; prob.z(j) = sum - prob.c; }
            } else {
                if (prob.z(j) < 0.0) { prob.z(j) = 0.0; prob.z(i) = sum; }
            }
            if (sum > prob.c) {
                if (prob.z(j) > prob.c) { prob.z(j) = prob.c; prob.z(i) = sum - prob.c; }
            } else {
                if (prob.z(i) < 0.0) { prob.z(i) = 0.0; prob.z(j) = sum; }
            }
        }

        const double delta_i = prob.z(i) - old_i;
        const double delta_j = prob.z(j) - old_j;
        if (delta_i == 0.0 && delta_j == 0.0) {
            // Numerically stuck pair; KKT gap is within round-off of tolerance.
            converged = true;
            break;
        }
        const Eigen::VectorXd g_delta =
            prob.sign(i) * delta_i * K.col(si) + prob.sign(j) * delta_j * K.col(sj);
        prob.grad.head(n) += g_delta;
        prob.grad.tail(n) -= g_delta;
    }

    // Bias from the KKT conditions: average -s*G over free variables, else the
    // midpoint of the bound-derived bracket.
    double upper = std::numeric_limits<double>::infinity();
    double lower = -std::numeric_limits<double>::infinity();
    double free_sum = 0.0;
    long free_count = 0;
    for (Eigen::Index t = 0; t < 2 * n; ++t) {
        const double value = -prob.sign(t) * prob.grad(t);
        if (prob.z(t) >= prob.c) {
            if (prob.sign(t) > 0.0) upper = std::min(upper, value);
            else lower = std::max(lower, value);
        } else if (prob.z(t) <= 0.0) {
            if (prob.sign(t) > 0.0) lower = std::max(lower, value);
            else upper = std::min(upper, value);
        } else {
            free_sum += value;
            ++free_count;
        }
    }
    const double bias = free_count > 0 ? free_sum / static_cast<double>(free_count) : (upper + lower) / 2.0;

    SvrModel model;
    model.gamma = gamma;
    model.bias = bias;
    model.converged = converged;

    std::vector<Eigen::Index> sv;
    for (Eigen::Index t = 0; t < n; ++t) {
        if (prob.z(t) - prob.z(t + n) != 0.0) sv.push_back(t);
    }
    model.support_vectors.resize(static_cast<Eigen::Index>(sv.size()), X.cols());
    model.dual_coefficients.resize(static_cast<Eigen::Index>(sv.size()));
    for (std::size_t r = 0; r < sv.size(); ++r) {
        model.support_vectors.row(static_cast<Eigen::Index>(r)) = X.row(sv[r]);
        model.dual_coefficients(static_cast<Eigen::Index>(r)) = prob.z(sv[r]) - prob.z(sv[r] + n);
    }
    return model;
}

Eigen::VectorXd predict_svr(const SvrModel& model, const Eigen::MatrixXd& X) {
    if (model.support_count() == 0) {
        return Eigen::VectorXd::Constant(X.rows(), model.bias);
    }
    if (X.cols() != model.support_vectors.cols()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "model has " + std::to_string(model.support_vectors.cols()) + " columns, input has " +
                        std::to_string(X.cols()));
    }
    const Eigen::MatrixXd K = rbf_kernel(X, model.support_vectors, model.gamma);
    return (K * model.dual_coefficients).array() + model.bias;
}

}  // namespace tnr

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "tnr/rng.hpp"

namespace testutil {

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, tnr::Rng& rng,
                                     double lo = -1.0, double hi = 1.0) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            m(i, j) = rng.uniform(lo, hi);
        }
    }
    return m;
}

inline Eigen::VectorXd random_vector(Eigen::Index size, tnr::Rng& rng, double lo = -1.0, double hi = 1.0) {
    Eigen::VectorXd v(size);
    for (Eigen::Index i = 0; i < size; ++i) {
        v(i) = rng.uniform(lo, hi);
    }
    return v;
}

// Central finite difference of a scalar function along one coordinate of a
// parameter array accessed through get/set callables.
template <typename GetSet, typename Loss>
double central_difference(GetSet&& get_set, Loss&& loss, double h) {
    const double original = get_set(nullptr);
    double plus = original + h;
    get_set(&plus);
    const double f_plus = loss();
    double minus = original - h;
    get_set(&minus);
    const double f_minus = loss();
    double restore = original;
    get_set(&restore);
    return (f_plus - f_minus) / (2.0 * h);
}

// Eigendecomposition oracle: cyclic Jacobi rotations on a symmetric matrix.
// Deliberately independent of the SVD route used by the PCA implementation.
struct JacobiEigen {
    Eigen::VectorXd values;   // descending
    Eigen::MatrixXd vectors;  // columns aligned with values
};

inline JacobiEigen jacobi_eigendecomposition(Eigen::MatrixXd A, int sweeps = 100, double tol = 1e-14) {
    const Eigen::Index n = A.rows();
    Eigen::MatrixXd V = Eigen::MatrixXd::Identity(n, n);
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                off += A(p, q) * A(p, q);
            }
        }
        if (off < tol) break;
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                if (A(p, q) == 0.0) continue;
                const double theta = (A(q, q) - A(p, p)) / (2.0 * A(p, q));
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                Eigen::MatrixXd R = Eigen::MatrixXd::Identity(n, n);
                R(p, p) = c;
                R(q, q) = c;
                R(p, q) = s;
                R(q, p) = -s;
                A = R.transpose() * A * R;
                V = V * R;
            }
        }
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return A(a, a) > A(b, b); });

    JacobiEigen out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        out.values(i) = A(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]);
        out.vectors.col(i) = V.col(order[static_cast<std::size_t>(i)]);
    }
    return out;
}

// Brute-force best split: enumerates every (feature, midpoint) candidate and
// recomputes both side SSEs by direct summation.
struct BruteSplit {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double sse_reduction = 0.0;
};

inline double direct_sse(const Eigen::VectorXd& y, const std::vector<Eigen::Index>& samples) {
    if (samples.empty()) return 0.0;
    double mean = 0.0;
    for (const auto s : samples) mean += y(s);
    mean /= static_cast<double>(samples.size());
    double sse = 0.0;
    for (const auto s : samples) sse += (y(s) - mean) * (y(s) - mean);
    return sse;
}

inline BruteSplit brute_force_split(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                    const std::vector<Eigen::Index>& samples, int min_samples_leaf) {
    BruteSplit best;
    const double parent_sse = direct_sse(y, samples);
    for (int f = 0; f < X.cols(); ++f) {
        std::vector<double> values;
        for (const auto s : samples) values.push_back(X(s, f));
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        for (std::size_t i = 0; i + 1 < values.size(); ++i) {
            const double threshold = 0.5 * (values[i] + values[i + 1]);
            std::vector<Eigen::Index> left, right;
            for (const auto s : samples) {
                (X(s, f) < threshold ? left : right).push_back(s);
            }
            if (static_cast<int>(left.size()) < min_samples_leaf ||
                static_cast<int>(right.size()) < min_samples_leaf) {
                continue;
            }
            const double reduction = parent_sse - direct_sse(y, left) - direct_sse(y, right);
            if (reduction > best.sse_reduction) {
                best.found = true;
                best.feature = f;
                best.threshold = threshold;
                best.sse_reduction = reduction;
            }
        }
    }
    return best;
}

}  // namespace testutil

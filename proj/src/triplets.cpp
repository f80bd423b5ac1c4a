#include "tnr/triplets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "tnr/rng.hpp"

namespace tnr {

PairRelation classify_pair(double y_anchor, double y_x, const MiningConfig& config) {
    config.validate();
    const double gap = std::abs(y_x - y_anchor);
    if (gap <= config.delta_p) return PairRelation::Positive;
    if (gap >= config.delta_n) return PairRelation::Negative;
    return PairRelation::Gap;
}

namespace {

// Candidate lookup over labels sorted ascending. Positives form one
// contiguous window around the anchor's label, negatives two tail windows;
// window bounds come from binary search so each draw is O(log n).
struct SortedLabels {
    std::vector<double> values;           // sorted
    std::vector<Eigen::Index> original;   // sorted position -> original index
    std::vector<std::size_t> sorted_pos;  // original index -> sorted position

    explicit SortedLabels(const Eigen::VectorXd& labels) {
        const auto n = static_cast<std::size_t>(labels.size());
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (labels(static_cast<Eigen::Index>(a)) != labels(static_cast<Eigen::Index>(b))) {
                return labels(static_cast<Eigen::Index>(a)) < labels(static_cast<Eigen::Index>(b));
            }
            return a < b;
        });
        values.resize(n);
        original.resize(n);
        sorted_pos.resize(n);
        for (std::size_t p = 0; p < n; ++p) {
            values[p] = labels(static_cast<Eigen::Index>(order[p]));
            original[p] = static_cast<Eigen::Index>(order[p]);
            sorted_pos[order[p]] = p;
        }
    }

    std::size_t size() const { return values.size(); }

    // [lo, hi) half-open window of sorted positions with value in [a, b].
    std::pair<std::size_t, std::size_t> window(double a, double b) const {
        const auto lo = std::lower_bound(values.begin(), values.end(), a) - values.begin();
        const auto hi = std::upper_bound(values.begin(), values.end(), b) - values.begin();
        return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
    }
};

}  // namespace

std::vector<Triplet> mine_triplets(const Eigen::VectorXd& labels, std::size_t count,
                                   const MiningConfig& config, std::uint64_t seed) {
    config.validate();
    if (count == 0) {
        throw Error(ErrorCode::InvalidConfig, "triplet count must be >= 1");
    }
    const auto n = static_cast<std::size_t>(labels.size());
    if (n < 2) {
        throw Error(ErrorCode::InfeasibleAnchor, "need at least 2 samples to mine triplets");
    }

    const SortedLabels sorted(labels);
    Rng rng(seed);
    std::vector<Triplet> out;
    out.reserve(count);

    while (out.size() < count) {
        bool formed = false;
        for (int attempt = 0; attempt < config.max_attempts; ++attempt) {
            const auto anchor = static_cast<Eigen::Index>(rng.uniform_index(n));
            const double y_a = labels(anchor);
            const std::size_t a_pos = sorted.sorted_pos[static_cast<std::size_t>(anchor)];

            // Positive window includes the anchor itself; exclude it by position.
            const auto [plo, phi] = sorted.window(y_a - config.delta_p, y_a + config.delta_p);
            const std::size_t positive_count = (phi - plo) - 1;

            const auto [dummy_lo, left_hi] =
                sorted.window(-std::numeric_limits<double>::infinity(), y_a - config.delta_n);
            (void)dummy_lo;
            const auto [right_lo, right_hi] =
                sorted.window(y_a + config.delta_n, std::numeric_limits<double>::infinity());
            const std::size_t negative_count = left_hi + (right_hi - right_lo);

            if (positive_count == 0 || negative_count == 0) {
                continue;
            }

            std::size_t p_pick = plo + rng.uniform_index(positive_count);
            if (p_pick >= a_pos) ++p_pick;  // skip the anchor's own slot

            std::size_t n_pick = rng.uniform_index(negative_count);
            if (n_pick >= left_hi) {
                n_pick = right_lo + (n_pick - left_hi);
            }

            out.push_back(Triplet{anchor, sorted.original[p_pick], sorted.original[n_pick]});
            formed = true;
            break;
        }
        if (!formed) {
            throw Error(ErrorCode::InfeasibleAnchor,
                        "no anchor with both positive and negative candidates after " +
                            std::to_string(config.max_attempts) + " draws");
        }
    }
    return out;
}

double triplet_loss(const Eigen::VectorXd& v_a, const Eigen::VectorXd& v_p,
                    const Eigen::VectorXd& v_n, const TripletLossConfig& config) {
    if (v_a.size() != v_p.size() || v_a.size() != v_n.size()) {
        throw Error(ErrorCode::DimensionMismatch, "triplet embedding dimensions differ");
    }
    const double d_ap = (v_a - v_p).squaredNorm();
    const double d_an = (v_a - v_n).squaredNorm();
    return std::max(d_ap - d_an + config.margin, 0.0);
}

TripletGrad triplet_loss_grad(const Eigen::VectorXd& v_a, const Eigen::VectorXd& v_p,
                              const Eigen::VectorXd& v_n, const TripletLossConfig& config) {
    if (v_a.size() != v_p.size() || v_a.size() != v_n.size()) {
        throw Error(ErrorCode::DimensionMismatch, "triplet embedding dimensions differ");
    }
    TripletGrad grad;
    const double d_ap = (v_a - v_p).squaredNorm();
    const double d_an = (v_a - v_n).squaredNorm();
    if (d_ap - d_an + config.margin > 0.0) {
        grad.anchor = 2.0 * (v_n - v_p);
        grad.positive = 2.0 * (v_p - v_a);
        grad.negative = 2.0 * (v_a - v_n);
    } else {
        grad.anchor = Eigen::VectorXd::Zero(v_a.size());
        grad.positive = Eigen::VectorXd::Zero(v_a.size());
        grad.negative = Eigen::VectorXd::Zero(v_a.size());
    }
    return grad;
}

void dump_triplets_csv(const std::vector<Triplet>& triplets, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot write " + path);
    }
    out << "anchor_idx,positive_idx,negative_idx\n";
    for (const auto& t : triplets) {
        out << t.anchor << ',' << t.positive << ',' << t.negative << '\n';
    }
}

}  // namespace tnr

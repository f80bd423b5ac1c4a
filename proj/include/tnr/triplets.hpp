#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "tnr/error.hpp"

namespace tnr {

// Thresholds defining positive/negative membership relative to an anchor
// label. Pairs whose label distance falls strictly between delta_p and
// delta_n lie in the gap and are discarded.
struct MiningConfig {
    double delta_p = 0.1;
    double delta_n = 0.5;
    int max_attempts = 10000;  // anchor redraws per triplet before giving up

    void validate() const {
        if (!(delta_p >= 0.0 && delta_p < delta_n)) {
            throw Error(ErrorCode::InvalidConfig, "require 0 <= delta_p < delta_n");
        }
    }
};

struct Triplet {
    Eigen::Index anchor;
    Eigen::Index positive;
    Eigen::Index negative;
};

struct TripletLossConfig {
    double margin = 0.2;
};

enum class PairRelation { Positive, Negative, Gap };

// Positive iff |y_x - y_anchor| <= delta_p, Negative iff >= delta_n,
// Gap otherwise. Both thresholds are inclusive.
PairRelation classify_pair(double y_anchor, double y_x, const MiningConfig& config);

// Draws `count` triplets: anchors uniform with replacement, positive and
// negative uniform over their qualifying sets. Deterministic given seed.
// Throws InfeasibleAnchor when max_attempts anchor draws in a row fail to
// produce both a nonempty positive and negative set.
std::vector<Triplet> mine_triplets(const Eigen::VectorXd& labels, std::size_t count,
                                   const MiningConfig& config, std::uint64_t seed);

// max(||v_a - v_p||^2 - ||v_a - v_n||^2 + margin, 0)
double triplet_loss(const Eigen::VectorXd& v_a, const Eigen::VectorXd& v_p,
                    const Eigen::VectorXd& v_n, const TripletLossConfig& config);

struct TripletGrad {
    Eigen::VectorXd anchor;
    Eigen::VectorXd positive;
    Eigen::VectorXd negative;
};

// Gradient of triplet_loss w.r.t. the three embeddings; all zero when the
// hinge is inactive (the zero subgradient is used at the kink).
TripletGrad triplet_loss_grad(const Eigen::VectorXd& v_a, const Eigen::VectorXd& v_p,
                              const Eigen::VectorXd& v_n, const TripletLossConfig& config);

// Writes `anchor_idx,positive_idx,negative_idx` rows for debugging.
void dump_triplets_csv(const std::vector<Triplet>& triplets, const std::string& path);

}  // namespace tnr

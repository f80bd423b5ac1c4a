#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "tnr/error.hpp"

namespace tnr {

// Per-song feature table. Rows follow file order; song ids are unique and
// every value is finite after a successful load.
struct FeatureMatrix {
    std::vector<std::string> song_ids;
    std::vector<std::string> columns;
    Eigen::MatrixXd values;  // n x d

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }
};

// Continuous valence/arousal labels per song. `normalized` marks whether the
// values have been min-max mapped onto [-1, 1].
struct AnnotationTable {
    std::vector<std::string> song_ids;
    Eigen::VectorXd valence;
    Eigen::VectorXd arousal;
    bool normalized = false;

    Eigen::Index size() const { return valence.size(); }
};

enum class Target { Valence, Arousal };

const char* target_name(Target t);
Target target_from_name(const std::string& name);

inline const Eigen::VectorXd& labels_for(const AnnotationTable& table, Target t) {
    return t == Target::Valence ? table.valence : table.arousal;
}

struct FoldAssignment {
    int k = 0;
    std::vector<int> assignment;  // per-sample fold index in [0, k)

    std::vector<Eigen::Index> train_indices(int fold) const;
    std::vector<Eigen::Index> test_indices(int fold) const;
};

// Column-wise z-scoring statistics, fit on training data only. Columns with
// zero standard deviation transform to all-zero.
struct Standardizer {
    Eigen::VectorXd mean;
    Eigen::VectorXd std_dev;  // population (divide-by-n) convention

    static Standardizer fit(const FeatureMatrix& train);
    Eigen::MatrixXd apply(const Eigen::MatrixXd& values) const;
    FeatureMatrix apply(const FeatureMatrix& features) const;
};

// CSV loaders. Feature files: header `song_id,<feature names...>`; annotation
// files: header containing song_id, valence, arousal in any column order.
FeatureMatrix load_feature_table(const std::string& path);
AnnotationTable load_annotations(const std::string& path);

// Affine min-max map of each label dimension onto [-1, 1].
AnnotationTable normalize_labels(const AnnotationTable& table);

// Fits the z-score on `train` and applies it to `apply_to`.
FeatureMatrix standardize_features(const FeatureMatrix& train, const FeatureMatrix& apply_to);

// Deterministic shuffled k-fold split; fold sizes differ by at most one.
FoldAssignment kfold_split(Eigen::Index n, int k, std::uint64_t seed);

// Reorders `annotations` to match the row order of `features` (by song_id).
AnnotationTable align_annotations(const FeatureMatrix& features, const AnnotationTable& annotations);

// Row subsets used when fitting per-fold pipelines.
FeatureMatrix select_rows(const FeatureMatrix& features, const std::vector<Eigen::Index>& indices);
Eigen::VectorXd select_rows(const Eigen::VectorXd& v, const std::vector<Eigen::Index>& indices);

}  // namespace tnr

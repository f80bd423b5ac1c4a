#include "tnr/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "tnr/rng.hpp"

namespace tnr {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string::size_type start = 0;
    while (true) {
        auto comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    if (!fields.empty() && !fields.back().empty() && fields.back().back() == '\r') {
        fields.back().pop_back();
    }
    return fields;
}

double parse_number(const std::string& field, std::size_t row, const std::string& column) {
    double value{};
    const char* first = field.data();
    const char* last = field.data() + field.size();
    while (first != last && (*first == ' ' || *first == '\t')) ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    while (ptr != last && (*ptr == ' ' || *ptr == '\t')) ++ptr;
    if (ec != std::errc{} || ptr != last) {
        throw Error(ErrorCode::NonNumericValue,
                    "row " + std::to_string(row) + ", column '" + column + "': cannot parse '" + field + "'");
    }
    if (!std::isfinite(value)) {
        throw Error(ErrorCode::NonNumericValue,
                    "row " + std::to_string(row) + ", column '" + column + "': non-finite value");
    }
    return value;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::MissingFile, path);
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        lines.push_back(line);
    }
    // Ignore trailing blank lines.
    while (!lines.empty() && lines.back().find_first_not_of(" \t\r") == std::string::npos) {
        lines.pop_back();
    }
    return lines;
}

}  // namespace

const char* target_name(Target t) {
    return t == Target::Valence ? "valence" : "arousal";
}

Target target_from_name(const std::string& name) {
    if (name == "valence") return Target::Valence;
    if (name == "arousal") return Target::Arousal;
    throw Error(ErrorCode::InvalidConfig, "unknown target '" + name + "' (expected valence or arousal)");
}

std::vector<Eigen::Index> FoldAssignment::train_indices(int fold) const {
    std::vector<Eigen::Index> out;
    out.reserve(assignment.size());
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        if (assignment[i] != fold) out.push_back(static_cast<Eigen::Index>(i));
    }
    return out;
}

std::vector<Eigen::Index> FoldAssignment::test_indices(int fold) const {
    std::vector<Eigen::Index> out;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        if (assignment[i] == fold) out.push_back(static_cast<Eigen::Index>(i));
    }
    return out;
}

FeatureMatrix load_feature_table(const std::string& path) {
    const auto lines = read_lines(path);
    if (lines.empty()) {
        throw Error(ErrorCode::MalformedRow, path + ": empty file");
    }
    const auto header = split_csv_line(lines[0]);
    if (header.empty() || header[0] != "song_id") {
        throw Error(ErrorCode::MissingColumn, path + ": first header column must be 'song_id'");
    }
    if (header.size() < 2) {
        throw Error(ErrorCode::MissingColumn, path + ": no feature columns");
    }

    FeatureMatrix out;
    out.columns.assign(header.begin() + 1, header.end());
    const std::size_t d = out.columns.size();
    const std::size_t n = lines.size() - 1;
    if (n == 0) {
        throw Error(ErrorCode::MalformedRow, path + ": no data rows");
    }
    out.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    out.song_ids.reserve(n);

    std::unordered_set<std::string> seen;
    seen.reserve(n);
    for (std::size_t r = 0; r < n; ++r) {
        const auto fields = split_csv_line(lines[r + 1]);
        if (fields.size() != d + 1) {
            throw Error(ErrorCode::MalformedRow,
                        path + ": row " + std::to_string(r + 1) + " has " + std::to_string(fields.size()) +
                            " fields, expected " + std::to_string(d + 1));
        }
        if (!seen.insert(fields[0]).second) {
            throw Error(ErrorCode::DuplicateSongId, path + ": row " + std::to_string(r + 1) + ": '" + fields[0] + "'");
        }
        out.song_ids.push_back(fields[0]);
        for (std::size_t c = 0; c < d; ++c) {
            out.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                parse_number(fields[c + 1], r + 1, out.columns[c]);
        }
    }
    return out;
}

AnnotationTable load_annotations(const std::string& path) {
    const auto lines = read_lines(path);
    if (lines.empty()) {
        throw Error(ErrorCode::MalformedRow, path + ": empty file");
    }
    const auto header = split_csv_line(lines[0]);
    auto column_of = [&](const std::string& name) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            throw Error(ErrorCode::MissingColumn, path + ": '" + name + "'");
        }
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t id_col = column_of("song_id");
    const std::size_t valence_col = column_of("valence");
    const std::size_t arousal_col = column_of("arousal");

    const std::size_t n = lines.size() - 1;
    AnnotationTable out;
    out.valence.resize(static_cast<Eigen::Index>(n));
    out.arousal.resize(static_cast<Eigen::Index>(n));
    out.song_ids.reserve(n);

    std::unordered_set<std::string> seen;
    for (std::size_t r = 0; r < n; ++r) {
        const auto fields = split_csv_line(lines[r + 1]);
        if (fields.size() != header.size()) {
            throw Error(ErrorCode::MalformedRow,
                        path + ": row " + std::to_string(r + 1) + " has " + std::to_string(fields.size()) +
                            " fields, expected " + std::to_string(header.size()));
        }
        if (!seen.insert(fields[id_col]).second) {
            throw Error(ErrorCode::DuplicateSongId,
                        path + ": row " + std::to_string(r + 1) + ": '" + fields[id_col] + "'");
        }
        out.song_ids.push_back(fields[id_col]);
        out.valence(static_cast<Eigen::Index>(r)) = parse_number(fields[valence_col], r + 1, "valence");
        out.arousal(static_cast<Eigen::Index>(r)) = parse_number(fields[arousal_col], r + 1, "arousal");
    }
    return out;
}

namespace {

Eigen::VectorXd normalize_dimension(const Eigen::VectorXd& v, const char* name) {
    const double lo = v.minCoeff();
    const double hi = v.maxCoeff();
    if (!(hi > lo)) {
        throw Error(ErrorCode::DegenerateRange, std::string(name) + ": all values identical (" + std::to_string(lo) + ")");
    }
    // min -> -1, max -> +1
    return (2.0 * (v.array() - lo) / (hi - lo) - 1.0).matrix();
}

}  // namespace

AnnotationTable normalize_labels(const AnnotationTable& table) {
    AnnotationTable out = table;
    out.valence = normalize_dimension(table.valence, "valence");
    out.arousal = normalize_dimension(table.arousal, "arousal");
    out.normalized = true;
    return out;
}

Standardizer Standardizer::fit(const FeatureMatrix& train) {
    const auto n = static_cast<double>(train.rows());
    Standardizer s;
    s.mean = train.values.colwise().mean().transpose();
    Eigen::MatrixXd centered = train.values.rowwise() - s.mean.transpose();
    s.std_dev = (centered.array().square().colwise().sum() / n).sqrt().matrix().transpose();
    return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& values) const {
    if (values.cols() != mean.size()) {
        throw Error(ErrorCode::ColumnMismatch,
                    "standardizer fit on " + std::to_string(mean.size()) + " columns, input has " +
                        std::to_string(values.cols()));
    }
    Eigen::MatrixXd out = values.rowwise() - mean.transpose();
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
        if (std_dev(c) > 0.0) {
            out.col(c) /= std_dev(c);
        } else {
            out.col(c).setZero();
        }
    }
    return out;
}

FeatureMatrix Standardizer::apply(const FeatureMatrix& features) const {
    FeatureMatrix out = features;
    out.values = apply(features.values);
    return out;
}

FeatureMatrix standardize_features(const FeatureMatrix& train, const FeatureMatrix& apply_to) {
    if (train.columns != apply_to.columns) {
        throw Error(ErrorCode::ColumnMismatch, "train and apply_to column sets differ");
    }
    return Standardizer::fit(train).apply(apply_to);
}

FoldAssignment kfold_split(Eigen::Index n, int k, std::uint64_t seed) {
    if (k < 2 || static_cast<Eigen::Index>(k) > n) {
        throw Error(ErrorCode::InvalidK, "k=" + std::to_string(k) + " with n=" + std::to_string(n));
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(order);

    FoldAssignment out;
    out.k = k;
    out.assignment.resize(static_cast<std::size_t>(n));
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        out.assignment[static_cast<std::size_t>(order[pos])] = static_cast<int>(pos % static_cast<std::size_t>(k));
    }
    return out;
}

AnnotationTable align_annotations(const FeatureMatrix& features, const AnnotationTable& annotations) {
    std::unordered_map<std::string, Eigen::Index> position;
    position.reserve(annotations.song_ids.size());
    for (std::size_t i = 0; i < annotations.song_ids.size(); ++i) {
        position.emplace(annotations.song_ids[i], static_cast<Eigen::Index>(i));
    }
    AnnotationTable out;
    out.normalized = annotations.normalized;
    out.song_ids = features.song_ids;
    out.valence.resize(features.rows());
    out.arousal.resize(features.rows());
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
        auto it = position.find(features.song_ids[static_cast<std::size_t>(i)]);
        if (it == position.end()) {
            throw Error(ErrorCode::SongIdMismatch,
                        "no annotation for song '" + features.song_ids[static_cast<std::size_t>(i)] + "'");
        }
        out.valence(i) = annotations.valence(it->second);
        out.arousal(i) = annotations.arousal(it->second);
    }
    return out;
}

FeatureMatrix select_rows(const FeatureMatrix& features, const std::vector<Eigen::Index>& indices) {
    FeatureMatrix out;
    out.columns = features.columns;
    out.song_ids.reserve(indices.size());
    out.values.resize(static_cast<Eigen::Index>(indices.size()), features.cols());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        out.song_ids.push_back(features.song_ids[static_cast<std::size_t>(indices[i])]);
        out.values.row(static_cast<Eigen::Index>(i)) = features.values.row(indices[i]);
    }
    return out;
}

Eigen::VectorXd select_rows(const Eigen::VectorXd& v, const std::vector<Eigen::Index>& indices) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(indices.size()));
    for (std::size_t i = 0; i < indices.size(); ++i) {
        out(static_cast<Eigen::Index>(i)) = v(indices[i]);
    }
    return out;
}

}  // namespace tnr

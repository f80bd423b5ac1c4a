#pragma once

#include <optional>
#include <string>

#include "tnr/data.hpp"
#include "tnr/gbm.hpp"
#include "tnr/reducers.hpp"
#include "tnr/svr.hpp"

namespace tnr {

// A fitted reducer together with the feature standardizer it was trained
// behind, so a saved model can be applied to raw feature CSVs.
struct ReducerDocument {
    Reducer reducer;
    std::optional<Standardizer> standardizer;
    std::vector<double> training_log;  // empty for PCA/RP
};

// Versioned JSON model documents. Doubles are written with shortest
// round-trip precision, so save -> load -> save is byte-identical.
void save_reducer(const std::string& path, const ReducerDocument& doc);
ReducerDocument load_reducer(const std::string& path);

void save_svr(const std::string& path, const SvrModel& model, const std::optional<Standardizer>& standardizer);
void save_gbm(const std::string& path, const GbmModel& model, const std::optional<Standardizer>& standardizer);

struct SvrDocument {
    SvrModel model;
    std::optional<Standardizer> standardizer;
};
struct GbmDocument {
    GbmModel model;
    std::optional<Standardizer> standardizer;
};

SvrDocument load_svr(const std::string& path);
GbmDocument load_gbm(const std::string& path);

// "tnn" | "ae" | "pca" | "rp" | "svr" | "gbm"
std::string peek_model_kind(const std::string& path);

}  // namespace tnr

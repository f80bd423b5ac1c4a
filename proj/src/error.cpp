#include "tnr/error.hpp"

namespace tnr {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::MissingFile: return "MissingFile";
        case ErrorCode::MalformedRow: return "MalformedRow";
        case ErrorCode::NonNumericValue: return "NonNumericValue";
        case ErrorCode::DuplicateSongId: return "DuplicateSongId";
        case ErrorCode::MissingColumn: return "MissingColumn";
        case ErrorCode::DegenerateRange: return "DegenerateRange";
        case ErrorCode::ColumnMismatch: return "ColumnMismatch";
        case ErrorCode::InvalidK: return "InvalidK";
        case ErrorCode::InfeasibleAnchor: return "InfeasibleAnchor";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
        case ErrorCode::InvalidDims: return "InvalidDims";
        case ErrorCode::RankDeficient: return "RankDeficient";
        case ErrorCode::NotFitted: return "NotFitted";
        case ErrorCode::DegenerateData: return "DegenerateData";
        case ErrorCode::DegenerateTarget: return "DegenerateTarget";
        case ErrorCode::SongIdMismatch: return "SongIdMismatch";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::IoError: return "IoError";
    }
    return "UnknownError";
}

bool Error::is_validation_error() const {
    switch (code_) {
        case ErrorCode::MissingFile:
        case ErrorCode::MalformedRow:
        case ErrorCode::NonNumericValue:
        case ErrorCode::DuplicateSongId:
        case ErrorCode::MissingColumn:
        case ErrorCode::ColumnMismatch:
        case ErrorCode::InvalidK:
        case ErrorCode::DimensionMismatch:
        case ErrorCode::ShapeMismatch:
        case ErrorCode::InvalidDims:
        case ErrorCode::SongIdMismatch:
        case ErrorCode::InvalidConfig:
            return true;
        default:
            return false;
    }
}

}  // namespace tnr

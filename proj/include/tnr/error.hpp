#pragma once

#include <stdexcept>
#include <string>

namespace tnr {

enum class ErrorCode {
    MissingFile,
    MalformedRow,
    NonNumericValue,
    DuplicateSongId,
    MissingColumn,
    DegenerateRange,
    ColumnMismatch,
    InvalidK,
    InfeasibleAnchor,
    DimensionMismatch,
    ShapeMismatch,
    NonFiniteLoss,
    InvalidDims,
    RankDeficient,
    NotFitted,
    DegenerateData,
    DegenerateTarget,
    SongIdMismatch,
    InvalidConfig,
    IoError,
};

const char* error_code_name(ErrorCode code);

// All recoverable failures in the library carry a code so callers can
// branch on the failure kind without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code) {}

    ErrorCode code() const { return code_; }

    // Input/usage problems exit the CLI with 1, everything else with 2.
    bool is_validation_error() const;

private:
    ErrorCode code_;
};

}  // namespace tnr

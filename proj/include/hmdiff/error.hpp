#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hmdiff {

enum class ErrorCode {
    // ingest
    Io,
    Parse,
    DuplicateClass,
    TooFewClasses,
    RowNotNormalized,
    LabelOutOfRange,
    MissingSampleId,
    DuplicateSampleId,
    ColumnMismatch,
    NegativeTime,
    PartialTimes,
    CoverageMismatch,
    DuplicateId,
    UnknownId,
    // metrics
    EmptySelection,
    KindMismatch,
    MissingTimes,
    InvalidBins,
    CannotBalance,
    DegenerateConditioning,
    // stats
    ZeroVariance,
    LengthMismatch,
    SingularDesign,
    // shared
    InvalidArgument,
    InvalidConfig,
    EmptyPool,
};

std::string_view to_string(ErrorCode code);

// True for codes raised while reading or aligning input files.
bool is_validation_error(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace hmdiff

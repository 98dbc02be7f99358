#include "hmdiff/error.hpp"

namespace hmdiff {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::Io: return "IoError";
        case ErrorCode::Parse: return "ParseError";
        case ErrorCode::DuplicateClass: return "DuplicateClass";
        case ErrorCode::TooFewClasses: return "TooFewClasses";
        case ErrorCode::RowNotNormalized: return "RowNotNormalized";
        case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
        case ErrorCode::MissingSampleId: return "MissingSampleId";
        case ErrorCode::DuplicateSampleId: return "DuplicateSampleId";
        case ErrorCode::ColumnMismatch: return "ColumnMismatch";
        case ErrorCode::NegativeTime: return "NegativeTime";
        case ErrorCode::PartialTimes: return "PartialTimes";
        case ErrorCode::CoverageMismatch: return "CoverageMismatch";
        case ErrorCode::DuplicateId: return "DuplicateId";
        case ErrorCode::UnknownId: return "UnknownId";
        case ErrorCode::EmptySelection: return "EmptySelection";
        case ErrorCode::KindMismatch: return "KindMismatch";
        case ErrorCode::MissingTimes: return "MissingTimes";
        case ErrorCode::InvalidBins: return "InvalidBins";
        case ErrorCode::CannotBalance: return "CannotBalance";
        case ErrorCode::DegenerateConditioning: return "DegenerateConditioning";
        case ErrorCode::ZeroVariance: return "ZeroVariance";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::SingularDesign: return "SingularDesign";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::EmptyPool: return "EmptyPool";
    }
    return "UnknownError";
}

bool is_validation_error(ErrorCode code) {
    switch (code) {
        case ErrorCode::Parse:
        case ErrorCode::DuplicateClass:
        case ErrorCode::TooFewClasses:
        case ErrorCode::RowNotNormalized:
        case ErrorCode::LabelOutOfRange:
        case ErrorCode::MissingSampleId:
        case ErrorCode::DuplicateSampleId:
        case ErrorCode::ColumnMismatch:
        case ErrorCode::NegativeTime:
        case ErrorCode::PartialTimes:
        case ErrorCode::CoverageMismatch:
        case ErrorCode::DuplicateId:
        case ErrorCode::InvalidConfig:
            return true;
        default:
            return false;
    }
}

}  // namespace hmdiff

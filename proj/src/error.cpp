#include "kremu/error.hpp"

namespace kremu {

const char* error_code_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NonFinite: return "NonFinite";
        case ErrorCode::NotSymmetric: return "NotSymmetric";
        case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::SyntaxError: return "SyntaxError";
        case ErrorCode::UnknownKernelName: return "UnknownKernelName";
        case ErrorCode::InvalidHyperparameter: return "InvalidHyperparameter";
        case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
        case ErrorCode::EmptyGrid: return "EmptyGrid";
        case ErrorCode::TooFewSamples: return "TooFewSamples";
        case ErrorCode::KTooLarge: return "KTooLarge";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::BadMagic: return "BadMagic";
        case ErrorCode::TruncatedFile: return "TruncatedFile";
        case ErrorCode::InvalidHeader: return "InvalidHeader";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::EmptyDataset: return "EmptyDataset";
        case ErrorCode::InvalidDimensions: return "InvalidDimensions";
        case ErrorCode::MissingVariable: return "MissingVariable";
        case ErrorCode::WindowNotCovered: return "WindowNotCovered";
        case ErrorCode::GridMismatch: return "GridMismatch";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

}  // namespace kremu

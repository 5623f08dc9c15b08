#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kremu {

enum class ErrorCode {
    DimensionMismatch,
    NonFinite,
    NotSymmetric,
    NotPositiveDefinite,
    NoConvergence,
    SyntaxError,
    UnknownKernelName,
    InvalidHyperparameter,
    EmptyTrainingSet,
    EmptyGrid,
    TooFewSamples,
    KTooLarge,
    EmptyInput,
    BadMagic,
    TruncatedFile,
    InvalidHeader,
    IoError,
    EmptyDataset,
    InvalidDimensions,
    MissingVariable,
    WindowNotCovered,
    GridMismatch,
    InvalidArgument,
};

const char* error_code_name(ErrorCode code) noexcept;

/// Single exception type for the library; callers dispatch on code().
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Kernel DSL parse failure with the byte offset where parsing stopped.
class SyntaxError : public Error {
public:
    SyntaxError(std::size_t position, const std::string& expected)
        : Error(ErrorCode::SyntaxError,
                "at position " + std::to_string(position) + ": expected " + expected),
          position_(position), expected_(expected) {}

    [[nodiscard]] std::size_t position() const noexcept { return position_; }
    [[nodiscard]] const std::string& expected() const noexcept { return expected_; }

private:
    std::size_t position_;
    std::string expected_;
};

}  // namespace kremu

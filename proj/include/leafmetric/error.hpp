#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace leafmetric {

enum class ErrorCode {
    UnsupportedFormat,
    CorruptFile,
    ZeroDimension,
    RectOutOfBounds,
    DimensionMismatch,
    DegenerateReference,
    NonPositiveLength,
    InvalidCalibration,
    EmptyMask,
    InvalidParameter,
    ConfigError,
    IoError,
    CalibrationMissing,
    SessionNotFound,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::CorruptFile: return "CorruptFile";
    case ErrorCode::ZeroDimension: return "ZeroDimension";
    case ErrorCode::RectOutOfBounds: return "RectOutOfBounds";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DegenerateReference: return "DegenerateReference";
    case ErrorCode::NonPositiveLength: return "NonPositiveLength";
    case ErrorCode::InvalidCalibration: return "InvalidCalibration";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::CalibrationMissing: return "CalibrationMissing";
    case ErrorCode::SessionNotFound: return "SessionNotFound";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so the
/// CLI and the HTTP layer can map it without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace leafmetric

/**
 * @file error.hpp
 * @brief Error codes and the exception type shared by every wslrr module.
 */
#pragma once

#include <stdexcept>
#include <string>

namespace wslrr {

/** @brief Machine-readable reason attached to every wslrr::Error. */
enum class ErrorCode {
    NonNormalized,
    NegativeEntry,
    ZeroInstanceMass,
    ShapeMismatch,
    EmptyClass,
    IndexOutOfRange,
    ZeroConfidence,
    DegenerateParams,
    InvalidParams,
    NotBinary,
    ZeroPairMass,
    NotAnEdge,
    KTooLarge,
    Singular,
    NonSquare,
    WrongFamily,
    BadSize,
    UnsupportedScenario,
    NonFiniteScore,
    EmptyChannel,
    SpecMismatch,
    ZeroChannelMass,
    ParseError,
    SchemaMismatch,
    NonDifferentiableLoss,
    Diverged,
};

/** @brief Stable spelling of an error code, used in reports and CLI diagnostics. */
inline const char* error_name(ErrorCode c) {
    switch (c) {
    case ErrorCode::NonNormalized: return "NonNormalized";
    case ErrorCode::NegativeEntry: return "NegativeEntry";
    case ErrorCode::ZeroInstanceMass: return "ZeroInstanceMass";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::EmptyClass: return "EmptyClass";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::ZeroConfidence: return "ZeroConfidence";
    case ErrorCode::DegenerateParams: return "DegenerateParams";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::NotBinary: return "NotBinary";
    case ErrorCode::ZeroPairMass: return "ZeroPairMass";
    case ErrorCode::NotAnEdge: return "NotAnEdge";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::Singular: return "Singular";
    case ErrorCode::NonSquare: return "NonSquare";
    case ErrorCode::WrongFamily: return "WrongFamily";
    case ErrorCode::BadSize: return "BadSize";
    case ErrorCode::UnsupportedScenario: return "UnsupportedScenario";
    case ErrorCode::NonFiniteScore: return "NonFiniteScore";
    case ErrorCode::EmptyChannel: return "EmptyChannel";
    case ErrorCode::SpecMismatch: return "SpecMismatch";
    case ErrorCode::ZeroChannelMass: return "ZeroChannelMass";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::NonDifferentiableLoss: return "NonDifferentiableLoss";
    case ErrorCode::Diverged: return "Diverged";
    }
    return "Unknown";
}

/** @brief Exception carrying an ErrorCode; what() is "<Code>: <detail>". */
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail)
        : std::runtime_error(std::string(error_name(code)) + ": " + detail), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace wslrr

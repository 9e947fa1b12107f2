#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kacward {

enum class ErrorCode {
    CrossingEdges,
    NotSimple,
    DanglingEdge,
    IsolatedVertex,
    InvalidFace,
    UnknownFace,
    UnknownVertex,
    EmptyInterior,
    DegenerateEdge,
    MissingWeight,
    ZeroWeight,
    TooLarge,
    InvalidBeta,
    NotInRegime,
    BranchFailure,
    NoConvergence,
    NotContractive,
    NotRhombic,
    AngleOutOfBounds,
    InvalidArgument,
    ParseError,
};

constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::CrossingEdges: return "CrossingEdges";
        case ErrorCode::NotSimple: return "NotSimple";
        case ErrorCode::DanglingEdge: return "DanglingEdge";
        case ErrorCode::IsolatedVertex: return "IsolatedVertex";
        case ErrorCode::InvalidFace: return "InvalidFace";
        case ErrorCode::UnknownFace: return "UnknownFace";
        case ErrorCode::UnknownVertex: return "UnknownVertex";
        case ErrorCode::EmptyInterior: return "EmptyInterior";
        case ErrorCode::DegenerateEdge: return "DegenerateEdge";
        case ErrorCode::MissingWeight: return "MissingWeight";
        case ErrorCode::ZeroWeight: return "ZeroWeight";
        case ErrorCode::TooLarge: return "TooLarge";
        case ErrorCode::InvalidBeta: return "InvalidBeta";
        case ErrorCode::NotInRegime: return "NotInRegime";
        case ErrorCode::BranchFailure: return "BranchFailure";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::NotContractive: return "NotContractive";
        case ErrorCode::NotRhombic: return "NotRhombic";
        case ErrorCode::AngleOutOfBounds: return "AngleOutOfBounds";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::ParseError: return "ParseError";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit-code mapping) can branch on the kind.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace kacward

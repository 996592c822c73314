#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace reopt {

enum class ErrorCode {
    InvalidParams,
    InvalidHazard,
    InvalidLaw,
    InvalidMode,
    InvalidPrice,
    NonFinitePayoff,
    TooLarge,
    UnboundedPayoff,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Single exception type for the library. The code lets callers (the CLI in
/// particular) map failures onto exit statuses without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::InvalidHazard: return "InvalidHazard";
    case ErrorCode::InvalidLaw: return "InvalidLaw";
    case ErrorCode::InvalidMode: return "InvalidMode";
    case ErrorCode::InvalidPrice: return "InvalidPrice";
    case ErrorCode::NonFinitePayoff: return "NonFinitePayoff";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::UnboundedPayoff: return "UnboundedPayoff";
    }
    return "Unknown";
}

}  // namespace reopt

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tries {

enum class ErrorKind {
    Precondition,
    KeyExhausted,
    DepthGuardExceeded,
    IndexOutOfRange,
    DegenerateVariance,
    GuardExceeded,
    RatioSpecMismatch,
    PoleError,
    TruncationNotConverged,
    NotPositiveDefinite,
    VariantUnavailable,
    ZeroVariance,
    Io,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::Precondition: return "Precondition";
    case ErrorKind::KeyExhausted: return "KeyExhausted";
    case ErrorKind::DepthGuardExceeded: return "DepthGuardExceeded";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::DegenerateVariance: return "DegenerateVariance";
    case ErrorKind::GuardExceeded: return "GuardExceeded";
    case ErrorKind::RatioSpecMismatch: return "RatioSpecMismatch";
    case ErrorKind::PoleError: return "PoleError";
    case ErrorKind::TruncationNotConverged: return "TruncationNotConverged";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::VariantUnavailable: return "VariantUnavailable";
    case ErrorKind::ZeroVariance: return "ZeroVariance";
    case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

/// Every failure raised by the library carries a kind so callers (the CLI in
/// particular) can map it to an exit status without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline void require(bool condition, const std::string& message) {
    if (!condition) throw Error(ErrorKind::Precondition, message);
}

inline void require_probability(double p) {
    // also rejects NaN
    if (!(p > 0.0 && p < 1.0)) throw Error(ErrorKind::Precondition, "p must be in (0,1)");
}

} // namespace tries

#pragma once

#include <stdexcept>
#include <string>

namespace difflab {

// Error categories used across the library. Every validation failure throws
// difflab::Error carrying one of these codes so callers (CLI, tests) can
// distinguish config mistakes from runtime blowups.
enum class Errc {
    NonPositiveWeight,
    WeightSumMismatch,
    DimensionMismatch,
    NonPositiveVariance,
    NegativeTime,
    NonPositiveTime,
    InvalidInterval,
    InvalidRange,
    InvalidGrid,
    NegativeLambda,
    NonFiniteLoss,
    NonFiniteState,
    DimensionUnsupported,
    InvalidConfig,
};

inline const char* errc_name(Errc c) {
    switch (c) {
        case Errc::NonPositiveWeight: return "NonPositiveWeight";
        case Errc::WeightSumMismatch: return "WeightSumMismatch";
        case Errc::DimensionMismatch: return "DimensionMismatch";
        case Errc::NonPositiveVariance: return "NonPositiveVariance";
        case Errc::NegativeTime: return "NegativeTime";
        case Errc::NonPositiveTime: return "NonPositiveTime";
        case Errc::InvalidInterval: return "InvalidInterval";
        case Errc::InvalidRange: return "InvalidRange";
        case Errc::InvalidGrid: return "InvalidGrid";
        case Errc::NegativeLambda: return "NegativeLambda";
        case Errc::NonFiniteLoss: return "NonFiniteLoss";
        case Errc::NonFiniteState: return "NonFiniteState";
        case Errc::DimensionUnsupported: return "DimensionUnsupported";
        case Errc::InvalidConfig: return "InvalidConfig";
    }
    return "UnknownError";
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) {
    throw Error(code, what);
}

inline void require(bool cond, Errc code, const std::string& what) {
    if (!cond) fail(code, what);
}

} // namespace difflab

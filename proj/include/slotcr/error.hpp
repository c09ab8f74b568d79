#pragma once

#include <stdexcept>
#include <string>

namespace slotcr {

enum class ErrorCode {
    InvalidParameter,
    InvalidProbability,
    DegenerateChain,
    DimensionMismatch,
    NoConvergence,
    InvalidCounts,
    InvalidTruncation,
    ZeroRate,
    InvalidConfig,
    ConfigParse,
    Io,
};

const char* to_string(ErrorCode code);

/// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

inline const char* to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidParameter: return "invalid-parameter";
    case ErrorCode::InvalidProbability: return "invalid-probability";
    case ErrorCode::DegenerateChain: return "degenerate-chain";
    case ErrorCode::DimensionMismatch: return "dimension-mismatch";
    case ErrorCode::NoConvergence: return "no-convergence";
    case ErrorCode::InvalidCounts: return "invalid-counts";
    case ErrorCode::InvalidTruncation: return "invalid-truncation";
    case ErrorCode::ZeroRate: return "zero-rate";
    case ErrorCode::InvalidConfig: return "invalid-config";
    case ErrorCode::ConfigParse: return "config-parse-error";
    case ErrorCode::Io: return "io-error";
    }
    return "unknown";
}

} // namespace slotcr

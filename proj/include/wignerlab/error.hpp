#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wignerlab {

// Every failure the library reports maps to one of these codes. The C API
// returns them as status values and the CLI prints codeName() verbatim.
enum class ErrorCode {
    InvalidDimension,
    InvalidState,
    UnsupportedOrder,
    InvalidArguments,
    OutOfRange,
    DimensionMismatch,
    NotHermitian,
    SingularInput,
    IllConditionedEnergy,
    NumericalFailure,
    Config,
    NotFound,
    Io,
    Corrupt,
};

constexpr std::string_view codeName(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidDimension: return "invalid-dimension";
        case ErrorCode::InvalidState: return "invalid-state";
        case ErrorCode::UnsupportedOrder: return "unsupported-order";
        case ErrorCode::InvalidArguments: return "invalid-arguments";
        case ErrorCode::OutOfRange: return "out-of-range";
        case ErrorCode::DimensionMismatch: return "dimension-mismatch";
        case ErrorCode::NotHermitian: return "not-hermitian";
        case ErrorCode::SingularInput: return "singular-input";
        case ErrorCode::IllConditionedEnergy: return "ill-conditioned-energy";
        case ErrorCode::NumericalFailure: return "numerical-failure";
        case ErrorCode::Config: return "config";
        case ErrorCode::NotFound: return "not-found";
        case ErrorCode::Io: return "io";
        case ErrorCode::Corrupt: return "corrupt";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(codeName(code)) + ": " + message), code_(code), message_(message) {}

    ErrorCode code() const noexcept { return code_; }
    // what() without the code prefix.
    const std::string& message() const noexcept { return message_; }

private:
    ErrorCode code_;
    std::string message_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace wignerlab

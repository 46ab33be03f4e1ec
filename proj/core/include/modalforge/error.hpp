#pragma once

#include <stdexcept>
#include <string>

namespace modalforge {

/// Failure categories shared by every module. The CLI maps each to an exit code.
enum class ErrorKind {
    InvalidParameter,   ///< a physical or numerical parameter violates its domain
    InvalidInput,       ///< malformed call arguments (empty or mismatched series)
    Data,               ///< bad file content or non-finite data values
    Config,             ///< inconsistent configuration
    UnsupportedRegime,  ///< valid input outside an oracle's domain
    Numerical,          ///< non-finite result during optimization
    TrainingFailure,    ///< loss diverged during training
    Checkpoint,         ///< model file fails validation
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

}  // namespace modalforge

#include "modalforge/error.hpp"

namespace modalforge {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidParameter: return "invalid parameter";
        case ErrorKind::InvalidInput: return "invalid input";
        case ErrorKind::Data: return "data error";
        case ErrorKind::Config: return "configuration error";
        case ErrorKind::UnsupportedRegime: return "unsupported regime";
        case ErrorKind::Numerical: return "numerical failure";
        case ErrorKind::TrainingFailure: return "training failure";
        case ErrorKind::Checkpoint: return "checkpoint error";
    }
    return "error";
}

}  // namespace modalforge

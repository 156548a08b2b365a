#include "varq/error.hpp"

namespace varq {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::invalid_argument: return "invalid-argument";
        case ErrorKind::invalid_spec: return "invalid-spec";
        case ErrorKind::invalid_state: return "invalid-state";
        case ErrorKind::numerical_failure: return "numerical-failure";
        case ErrorKind::step_rejected: return "step-rejected";
        case ErrorKind::diverged: return "diverged";
        case ErrorKind::max_iterations: return "max-iterations";
        case ErrorKind::fit_window_empty: return "fit-window-empty";
        case ErrorKind::io: return "io";
        case ErrorKind::config: return "config";
    }
    return "unknown";
}

}  // namespace varq

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace varq {

enum class ErrorKind {
    invalid_argument,
    invalid_spec,
    invalid_state,
    numerical_failure,
    step_rejected,
    diverged,
    max_iterations,
    fit_window_empty,
    io,
    config,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Exception carrying a machine-checkable category and, for step rejections,
/// the offending grid index.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message,
          std::optional<std::size_t> location = std::nullopt)
        : std::runtime_error(message), kind_(kind), location_(location) {}

    ErrorKind kind() const noexcept { return kind_; }
    std::optional<std::size_t> location() const noexcept { return location_; }

private:
    ErrorKind kind_;
    std::optional<std::size_t> location_;
};

}  // namespace varq

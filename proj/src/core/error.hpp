#pragma once

#include <stdexcept>
#include <string>

namespace fuzzyboost {

// Numeric values are mirrored by fb_status in the C API header.
enum class ErrorCode {
    invalid_argument = 1,
    io = 2,
    malformed_header = 3,
    dimension_mismatch = 4,
    non_finite_value = 5,
    empty_input = 6,
    version_mismatch = 7,
    corrupt = 8,
    duplicate_class = 9,
    unknown_class = 10,
    training_failed = 11,
    protocol_violation = 12,
    numeric = 13,
    internal = 14,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace fuzzyboost

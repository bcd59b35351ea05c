#pragma once

#include <stdexcept>
#include <string>

namespace glsge {

/// Failure category; doubles as the CLI exit status.
enum class ErrorKind : int {
    Config = 2,
    Data = 3,
    Numerical = 4,
};

/// Every library failure is thrown as this type.  `code()` is a short
/// machine-readable tag such as "not_psd" or "disjoint_supports".
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string code, const std::string &message)
        : std::runtime_error(message), kind_(kind), code_(std::move(code)) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }
    [[nodiscard]] const std::string &code() const noexcept { return code_; }
    [[nodiscard]] int exit_status() const noexcept { return static_cast<int>(kind_); }

private:
    ErrorKind kind_;
    std::string code_;
};

[[noreturn]] inline void fail(ErrorKind kind, std::string code, const std::string &message) {
    throw Error(kind, std::move(code), message);
}

}  // namespace glsge

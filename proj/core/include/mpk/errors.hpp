#pragma once

#include <stdexcept>
#include <string>

namespace mpk {

// All library failures carry a stable machine-readable code next to the
// human-readable message. The CLI maps codes to exit classes.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(code + ": " + what), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

// Validation / input errors (CLI exit 2)
struct ValidationError : Error {
    using Error::Error;
};
// Numerical failures (CLI exit 3)
struct NumericalError : Error {
    using Error::Error;
};

[[noreturn]] inline void throw_validation(const std::string& code, const std::string& what) {
    throw ValidationError(code, what);
}
[[noreturn]] inline void throw_numerical(const std::string& code, const std::string& what) {
    throw NumericalError(code, what);
}

}  // namespace mpk

#pragma once

#include <charconv>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace pinnacle {

namespace detail {
inline std::string short_number(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 6);
    return std::string(buf, res.ptr);
}
}  // namespace detail

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid user-supplied parameters or configuration files.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A height configuration violates the gradient restriction of the RSOS model.
class AdmissibilityError : public Error {
public:
    using Error::Error;
};

/// An iterative or direct solve failed to reach the requested residual.
class SolverError : public Error {
public:
    SolverError(const std::string& what, double residual)
        : Error(what + " (residual " + detail::short_number(residual) + ")"), residual_(residual) {}

    [[nodiscard]] double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// An exhaustive computation exceeds its enumeration budget.
class BudgetError : public Error {
public:
    BudgetError(const std::string& what, double required)
        : Error(what + " (required " + detail::short_number(required) + ")"), required_(required) {}

    [[nodiscard]] double required() const noexcept { return required_; }

private:
    double required_;
};

/// Structural violation of a combinatorial object (path family, circuit, ASM).
class ValidityError : public Error {
public:
    using Error::Error;
};

/// An operation was called outside its mathematical domain.
class DomainError : public Error {
public:
    using Error::Error;
};

}  // namespace pinnacle

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hr {

/// Coarse failure class. The CLI maps each category to a distinct exit code.
enum class ErrorCategory { config, numerical, io };

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    [[nodiscard]] ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorCategory::config, what) {}
};

/// Inputs disagree in size along a named axis ("N", "n", "m", "r", ...).
class DimensionError : public Error {
public:
    DimensionError(std::string axis, const std::string& what)
        : Error(ErrorCategory::config, "dimension mismatch on " + axis + ": " + what),
          axis_(std::move(axis)) {}

    [[nodiscard]] const std::string& axis() const noexcept { return axis_; }

private:
    std::string axis_;
};

class IndexError : public Error {
public:
    explicit IndexError(const std::string& what) : Error(ErrorCategory::config, what) {}
};

/// NaN or Inf found in an input; `index` is the flat position of the first offender.
class NonFiniteError : public Error {
public:
    NonFiniteError(std::string where, std::size_t index)
        : Error(ErrorCategory::numerical,
                "non-finite entry in " + where + " at flat index " + std::to_string(index)),
          where_(std::move(where)), index_(index) {}

    [[nodiscard]] const std::string& where() const noexcept { return where_; }
    [[nodiscard]] std::size_t index() const noexcept { return index_; }

private:
    std::string where_;
    std::size_t index_;
};

class BasisMismatchError : public Error {
public:
    explicit BasisMismatchError(const std::string& what) : Error(ErrorCategory::config, what) {}
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ErrorCategory::numerical, what) {}
};

/// Square system is numerically singular and no regularization / least-squares mode was requested.
class SingularSystemError : public NumericalError {
public:
    explicit SingularSystemError(const std::string& what) : NumericalError(what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorCategory::io, what) {}
};

class CorruptFileError : public IoError {
public:
    explicit CorruptFileError(const std::string& what) : IoError(what) {}
};

}  // namespace hr

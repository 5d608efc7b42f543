#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ftk {

/// Error families. The numeric values double as process exit codes.
enum class ErrorClass : int {
    Parse = 2,
    Infeasible = 3,
    Numerical = 4,
    Config = 5,
};

class Error : public std::runtime_error {
public:
    Error(ErrorClass cls, const std::string& what) : std::runtime_error(what), class_(cls) {}

    ErrorClass error_class() const noexcept { return class_; }
    int exit_code() const noexcept { return static_cast<int>(class_); }

private:
    ErrorClass class_;
};

/// Malformed input row. `line()` is 1-based and counts the header.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error(ErrorClass::Parse, "line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(ErrorClass::Parse, what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorClass::Parse, what) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorClass::Config, what) {}
};

/// A delivery month or maturity that the curve grid does not cover.
class CoverageError : public Error {
public:
    explicit CoverageError(const std::string& what) : Error(ErrorClass::Config, what) {}
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ErrorClass::Numerical, what) {}
};

/// Quotes that cannot be jointly repriced inside their bid/ask intervals.
class InfeasibleError : public Error {
public:
    InfeasibleError(const std::string& what, std::vector<std::string> quote_ids)
        : Error(ErrorClass::Infeasible, what), quote_ids_(std::move(quote_ids)) {}
    const std::vector<std::string>& quote_ids() const noexcept { return quote_ids_; }

private:
    std::vector<std::string> quote_ids_;
};

/// Rejection sampler produced too few admissible samples.
class SamplingError : public Error {
public:
    explicit SamplingError(const std::string& what) : Error(ErrorClass::Numerical, what) {}
};

}  // namespace ftk

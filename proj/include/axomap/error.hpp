#pragma once

#include <stdexcept>
#include <string>

namespace axomap {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad generator parameters or malformed run configuration.
class ConfigurationError : public Error {
public:
    using Error::Error;
};

/// Operand or value outside the declared domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Request exceeds what can be enumerated or represented.
class CapacityError : public Error {
public:
    using Error::Error;
};

/// Input violates a documented invariant (duplicates, bad lengths, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Malformed file content. Carries the 1-based line number when known.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Correlation is undefined because an input has zero variance.
class UndefinedCorrelation : public Error {
public:
    using Error::Error;
};

} // namespace axomap

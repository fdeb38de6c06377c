#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace koopman {

// Base of every error the library throws. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Dimension or shape mismatch between arguments.
class InputShapeError : public Error {
public:
    using Error::Error;
};

// Non-finite or otherwise unusable numeric data.
class DataValidationError : public Error {
public:
    using Error::Error;
};

// Invalid or inconsistent configuration (dictionary spec, regularizer spec, ...).
class ConfigurationError : public Error {
public:
    using Error::Error;
};

// Output data (Y or Y+) required but absent.
class MissingOutputError : public Error {
public:
    using Error::Error;
};

// A linear system that had to be solved is singular to working precision.
class SingularSystemError : public Error {
public:
    using Error::Error;
};

// A simulated trajectory left the finite range.
class DivergenceError : public Error {
public:
    using Error::Error;
};

// Malformed text input. line and column are 1-based; 0 means "not applicable".
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column = 0)
        : Error(format(what, line, column)), line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    static std::string format(const std::string& what, std::size_t line, std::size_t column) {
        std::string out = what;
        if (line > 0) {
            out += " (line " + std::to_string(line);
            if (column > 0) out += ", column " + std::to_string(column);
            out += ")";
        }
        return out;
    }

    std::size_t line_;
    std::size_t column_;
};

// Malformed JSON document; path is a JSON pointer to the offending value.
class JsonSchemaError : public Error {
public:
    JsonSchemaError(const std::string& what, std::string path)
        : Error(what + " at " + (path.empty() ? std::string("/") : path)), path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

}  // namespace koopman

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace iknn {

// Base class for every failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// File could not be opened, read or written.
class IoError : public Error {
public:
    using Error::Error;
};

// A required column is missing from a header row.
class SchemaError : public Error {
public:
    SchemaError(const std::string& column, const std::string& path)
        : Error("missing column '" + column + "' in " + path), column_(column) {}

    const std::string& column() const noexcept { return column_; }

private:
    std::string column_;
};

// A row could not be parsed; line numbers are 1-based and count the header.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// A caller violated a documented precondition.
class ContractError : public Error {
public:
    using Error::Error;
};

// An experiment configuration is invalid or leads to an unusable dataset.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Wraps a failure with the pipeline phase it happened in.
class PhaseError : public Error {
public:
    PhaseError(const std::string& phase, const std::string& what)
        : Error("[" + phase + "] " + what), phase_(phase) {}

    const std::string& phase() const noexcept { return phase_; }

private:
    std::string phase_;
};

} // namespace iknn

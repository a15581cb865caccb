#pragma once

#include <stdexcept>
#include <string>

namespace fraudbench {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Header does not match the Time,V1..V28,Amount,Class schema.
class SchemaError : public Error {
public:
    SchemaError(const std::string& column, const std::string& what)
        : Error(what + ": " + column), column_(column) {}
    const std::string& column() const noexcept { return column_; }

private:
    std::string column_;
};

/// Malformed data row. Row index is 1-based over data rows (header excluded).
class ParseError : public Error {
public:
    ParseError(std::size_t row, const std::string& what)
        : Error("row " + std::to_string(row) + ": " + what), row_(row) {}
    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

class EmptyDatasetError : public Error {
public:
    using Error::Error;
};

class ParameterError : public Error {
public:
    using Error::Error;
};

/// Invalid input handed to a pure function (length mismatch, non-finite value).
class InputError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Data-dependent failures that a Monte Carlo driver may retry with a fresh seed.
class DegenerateError : public Error {
public:
    using Error::Error;
};

class DegeneratePartitionError : public DegenerateError {
public:
    using DegenerateError::DegenerateError;
};

/// No genome of this length can satisfy the weight ceiling.
class CeilingError : public ParameterError {
public:
    using ParameterError::ParameterError;
};

/// Requested ratio/size cannot be met from the records available.
class InfeasibleError : public DegenerateError {
public:
    using DegenerateError::DegenerateError;
};

/// Training data unusable (e.g. a single class).
class TrainingError : public DegenerateError {
public:
    using DegenerateError::DegenerateError;
};

/// Train/validation split of an ensemble sample lost a class.
class SplitError : public DegenerateError {
public:
    using DegenerateError::DegenerateError;
};

}  // namespace fraudbench

#pragma once

#include <stdexcept>
#include <string>

namespace flarecast {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A value falls outside the domain an operation is defined on.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration (even kernel, interval not dividing 24, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Catalog header is missing a required column.
class SchemaError : public Error {
public:
    SchemaError(std::string column, const std::string& what)
        : Error(what), column_(std::move(column)) {}

    const std::string& column() const { return column_; }

private:
    std::string column_;
};

class EmptyCatalogError : public Error {
public:
    using Error::Error;
};

/// Operation called in the wrong lifecycle state (e.g. backward before forward).
class StateError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

/// Non-finite loss or gradient during training.
class TrainingAborted : public Error {
public:
    TrainingAborted(const std::string& what, int epoch, int batch, double max_abs_grad)
        : Error(what), epoch_(epoch), batch_(batch), max_abs_grad_(max_abs_grad) {}

    int epoch() const { return epoch_; }
    int batch() const { return batch_; }
    double max_abs_grad() const { return max_abs_grad_; }

private:
    int epoch_;
    int batch_;
    double max_abs_grad_;
};

} // namespace flarecast

#pragma once

#include <stdexcept>
#include <string>

namespace fatmargin {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Shape/length mismatches between inputs that must agree.
class StructuralError : public Error {
public:
    using Error::Error;
};

// Invalid user-supplied parameters (C <= 0, delta <= 0, k < 2, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Bad input data: unparseable rows, single-class files, unknown labels.
class DataError : public Error {
public:
    using Error::Error;
};

// Model file could not be parsed or has the wrong version.
class FormatError : public Error {
public:
    using Error::Error;
};

// The solver did not return an optimal point for a training problem.
class TrainingError : public Error {
public:
    TrainingError(const std::string& what, std::string status)
        : Error(what), status_(std::move(status)) {}

    const std::string& status() const noexcept { return status_; }

private:
    std::string status_;
};

} // namespace fatmargin

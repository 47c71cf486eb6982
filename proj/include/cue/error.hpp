#pragma once

#include <stdexcept>
#include <string>

namespace cue {

enum class ErrorKind {
    invalid_input,     // malformed or out-of-contract data
    io,                // missing or unreadable file
    metric_undefined,  // e.g. AUROC with one class present
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class InvalidInput : public Error {
public:
    explicit InvalidInput(const std::string& message) : Error(ErrorKind::invalid_input, message) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& message) : Error(ErrorKind::io, message) {}
};

class MetricUndefined : public Error {
public:
    explicit MetricUndefined(const std::string& message)
        : Error(ErrorKind::metric_undefined, message) {}
};

}  // namespace cue

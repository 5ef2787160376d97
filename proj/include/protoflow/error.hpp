#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace protoflow {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input failed an invariant. `field()` is a dotted path such as
/// "components[2].bbox" (may be empty when the whole document is bad).
class ValidationError : public Error {
public:
    ValidationError(const std::string& message, std::string field = {})
        : Error(message), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

class ConflictError : public Error {
public:
    using Error::Error;
};

/// A model backend failed. Retryable errors are transport-level (timeouts,
/// connection resets, 5xx) and are retried by the remote clients.
class BackendError : public Error {
public:
    BackendError(const std::string& message, bool retryable)
        : Error(message), retryable_(retryable) {}

    bool retryable() const noexcept { return retryable_; }

private:
    bool retryable_;
};

}  // namespace protoflow

#pragma once

#include <stdexcept>
#include <string>

namespace icsu {

/// Base of every error the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (corpus, KB, index, lexicon files).
class DataError : public Error {
public:
    using Error::Error;
};

/// Missing or contradictory configuration; detected before any side effect.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// File system failure (open, read, write).
class IoError : public Error {
public:
    using Error::Error;
};

/// Network or provider failure. `retryable` tells the caller whether another
/// attempt may succeed.
class TransportError : public Error {
public:
    TransportError(const std::string& what, bool retryable)
        : Error(what), retryable_(retryable) {}

    bool retryable() const noexcept { return retryable_; }

private:
    bool retryable_;
};

/// The per-run LLM request budget is spent.
class BudgetExhausted : public Error {
public:
    using Error::Error;
};

}  // namespace icsu

#pragma once

#include <stdexcept>
#include <string>

namespace qfocklab {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument is outside the mathematical domain of the operation
/// (odd pairing size, λ ≤ 1, |q| ≥ 1, non-real field vector, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A desk-scale guard or a configured budget was exceeded.
class SizeError : public Error {
public:
    using Error::Error;
};

/// Floating-point trouble: failed factorization, exponent overflow.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Hilbert–Schmidt / nuclear certificates do not exist for fixed vectors.
class CertificateUnavailable : public Error {
public:
    CertificateUnavailable() : Error("certificate unavailable") {}
};

/// Configuration parse or validation failure. `field` names the offending key.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& message)
        : Error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

} // namespace qfocklab

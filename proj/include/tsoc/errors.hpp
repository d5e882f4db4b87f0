#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tsoc {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// --- time scale construction / lookup ---

class NonDivisibleInterval : public Error {
public:
    using Error::Error;
};

class InvalidBase : public Error {
public:
    using Error::Error;
};

class TooFewPoints : public Error {
public:
    using Error::Error;
};

class NonFinite : public Error {
public:
    using Error::Error;
};

class PointNotInScale : public Error {
public:
    using Error::Error;
};

class ZeroGraininess : public Error {
public:
    using Error::Error;
};

// --- expressions ---

/// Parse failure; `offset` is the byte position in the input text.
class SyntaxError : public Error {
public:
    SyntaxError(std::string message, std::size_t offset)
        : Error(std::move(message)), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

class UnknownFunction : public Error {
public:
    using Error::Error;
};

class UnknownVariable : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

// --- problems, extremals, conservation ---

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class RegularityViolation : public Error {
public:
    using Error::Error;
};

/// Iterative solve hit its iteration cap; carries the best residual seen.
class NoConvergence : public Error {
public:
    NoConvergence(std::string message, double best_residual)
        : Error(std::move(message)), best_residual_(best_residual) {}
    double best_residual() const { return best_residual_; }

private:
    double best_residual_;
};

class RhoSigmaViolation : public Error {
public:
    using Error::Error;
};

class NonMonotoneTimeMap : public Error {
public:
    using Error::Error;
};

class NotAnExtremal : public Error {
public:
    using Error::Error;
};

} // namespace tsoc

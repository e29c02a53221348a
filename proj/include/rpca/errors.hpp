#pragma once

#include <stdexcept>
#include <string>

namespace rpca {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
    using std::runtime_error::runtime_error;
};

/// Shapes do not conform, or an index set is out of range.
class DimensionError : public Error {
 public:
    using Error::Error;
};

/// Malformed input file or matrix text.
class ParseError : public Error {
 public:
    using Error::Error;
};

/// NaN/Inf in inputs or iterates, or a failed factorization.
class NumericalError : public Error {
 public:
    using Error::Error;
};

/// Invalid configuration value (negative threshold, rho <= 1, ...).
class ConfigError : public Error {
 public:
    using Error::Error;
};

/// Input violates an operation precondition (e.g. dictionary not orthonormal).
class PreconditionError : public Error {
 public:
    using Error::Error;
};

/// The recovered seed block has numerical rank zero.
class SeedRankZero : public Error {
 public:
    SeedRankZero() : Error("seed matrix has numerical rank zero") {}
};

}  // namespace rpca

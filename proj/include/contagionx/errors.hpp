#pragma once

#include <stdexcept>
#include <string>

namespace contagionx {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input: bad CSV rows, negative amounts,
/// probabilities outside [0,1], unknown bank ids. CLI exit code 2.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// The model is outside its domain of validity: degenerate balance sheets,
/// supercritical contagion matrices. CLI exit code 3.
class ModelDomainError : public Error {
public:
    using Error::Error;
};

/// A numerical procedure failed: non-convergent iteration, singular solve.
/// CLI exit code 4.
class NumericalError : public Error {
public:
    using Error::Error;
};

} // namespace contagionx

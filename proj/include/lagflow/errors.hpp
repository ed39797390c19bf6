#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lagflow {

// Base class for all errors raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed expression source text. `position` is a 0-based byte offset.
struct ParseError : Error {
    ParseError(const std::string& what, std::size_t position)
        : Error(what + " (at position " + std::to_string(position) + ")"),
          position(position) {}
    std::size_t position;
};

// Evaluation failed: unbound variable, pole hit, or non-finite result.
struct EvalError : Error {
    using Error::Error;
};

// A domain/spec invariant was violated. `code` is a stable machine-readable
// name such as "BetaInitialMismatch" or "XiZero".
struct ValidationError : Error {
    ValidationError(std::string code_, const std::string& what)
        : Error(code_ + ": " + what), code(std::move(code_)) {}
    std::string code;
};

// Numerical machinery failed to converge (quadrature, ill-conditioned fit).
struct NumericalError : Error {
    using Error::Error;
};

}  // namespace lagflow

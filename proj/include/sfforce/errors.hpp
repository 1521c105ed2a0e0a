#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sfforce {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An argument lies outside the mathematical domain of an operation
// (negative temperature, negative power, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// A parameter set violates a physical invariant.
class ConfigurationError : public Error {
public:
    using Error::Error;
};

// Malformed call: sizes, frequencies above Nyquist, segment longer than data.
class ArgumentError : public Error {
public:
    using Error::Error;
};

// Non-finite state encountered while stepping the oscillator.
class IntegratorFault : public Error {
public:
    IntegratorFault(std::size_t step, const std::string& what)
        : Error("integrator fault at step " + std::to_string(step) + ": " + what), step_(step) {}

    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

// Spectral estimation could not produce a physical result.
class EstimationError : public Error {
public:
    using Error::Error;
};

}  // namespace sfforce

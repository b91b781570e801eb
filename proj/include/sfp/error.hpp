#pragma once

#include <stdexcept>
#include <string>

namespace sfp {

// Malformed or inconsistent input data (bad CSV, label mismatches, ...).
// The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure (sampler cannot initialize, non-finite target at every
// attempted start point, ...). The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid argument values (rates outside (0,1), bad diagnostic parameters,
// out-of-range sampler settings) throw std::invalid_argument with a message
// prefixed by the subsystem name; the CLI maps those to exit code 1.

} // namespace sfp

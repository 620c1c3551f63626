#pragma once

#include <stdexcept>
#include <string>

namespace isc {

// Raised when a model operation is undefined for its inputs (empty subset,
// zero supply mass, undefined rank conversion). Input validation failures use
// std::invalid_argument instead.
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Numerical solver failure: non-convergence, or no critical population below
// the configured ceiling.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace isc

#pragma once

#include <stdexcept>
#include <string>

namespace setfuse {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid inputs: malformed distributions, violated preconditions, bad
/// scenario files. The CLI maps these to exit code 2.
class InputError : public Error {
public:
    using Error::Error;
};

/// Numerical failure during fusion or weight optimisation (incompatible
/// supports, non-convergence). The CLI maps these to exit code 3.
class SolverError : public Error {
public:
    using Error::Error;
};

}  // namespace setfuse

#pragma once

#include <stdexcept>
#include <string>

namespace mlc {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid input: broken invariants, out-of-range parameters, malformed files.
struct ValidationError : Error {
    using Error::Error;
};

/// Numerical failure: non-convergence, loss of precision beyond recovery.
struct NumericalError : Error {
    using Error::Error;
};

/// Conic solver failed to produce a usable optimum.
struct SolverError : NumericalError {
    using NumericalError::NumericalError;
};

/// The constraint set admits no state at all (e.g. inconsistent measured data).
struct InfeasibleError : SolverError {
    using SolverError::SolverError;
};

}  // namespace mlc

#pragma once

#include <stdexcept>

namespace minksurf {

/// Base class for every error this library throws.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid chart construction, or a point outside a chart.
struct GridError : Error {
    using Error::Error;
};

/// Evaluation outside a solution family's valid region
/// (singular locus, negative radicand, exhausted integration range).
struct EvalError : Error {
    using Error::Error;
};

/// The input fields do not solve the governing equations: the
/// cross-derivative compatibility defect of a potential is too large.
struct CompatibilityError : Error {
    using Error::Error;
};

/// A coordinate change is singular (or too close to singular) somewhere
/// on the requested chart.
struct SingularError : Error {
    using Error::Error;
};

/// Per-point Newton inversion failed to converge.
struct NewtonError : Error {
    using Error::Error;
};

/// File or serialization failure.
struct IoError : Error {
    using Error::Error;
};

}  // namespace minksurf

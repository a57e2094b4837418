#pragma once

#include <stdexcept>
#include <string>

namespace cdi {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Measure fails a structural invariant (zero mass, negative density, ...).
struct InvalidMeasureError : Error {
    using Error::Error;
};

/// Argument outside its documented domain.
struct DomainError : Error {
    using Error::Error;
};

/// Caller violated an operation contract (e.g. missing x->0 limit with an atom at 0).
struct ContractError : Error {
    using Error::Error;
};

/// Adaptive quadrature could not reach the requested tolerance.
/// Carries the best available estimate and its error bound.
struct QuadratureError : Error {
    double best_estimate;
    double error_bound;
    QuadratureError(const std::string& what, double best, double bound)
        : Error(what), best_estimate(best), error_bound(bound) {}
};

/// Two supposedly-equal computation routes disagree beyond tolerance.
struct NumericalInconsistencyError : Error {
    using Error::Error;
};

/// Lookup outside the resolvable range of a table (no extrapolation allowed).
struct RangeError : Error {
    using Error::Error;
};

/// Tail exponent at q_max too close to 1 to close the speed integral.
struct TailNotResolvedError : Error {
    using Error::Error;
};

/// Grey and Schweinsberg classifications disagree; reports both partials.
struct CriteriaDisagreementError : Error {
    double schweinsberg_partial;
    double grey_partial;
    CriteriaDisagreementError(const std::string& what, double schw, double grey)
        : Error(what), schweinsberg_partial(schw), grey_partial(grey) {}
};

/// Measure not supported by this operation (e.g. an atom at x = 1).
struct UnsupportedMeasureError : Error {
    using Error::Error;
};

/// Rejection sampling exceeded its retry budget.
struct SamplingError : Error {
    using Error::Error;
};

/// Exact enumeration requested beyond its feasibility limit.
struct EnumerationLimitError : Error {
    using Error::Error;
};

/// An empirical bound that should be uniform is growing along the grid.
struct BoundViolationError : Error {
    using Error::Error;
};

}  // namespace cdi

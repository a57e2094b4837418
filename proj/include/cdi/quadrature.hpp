#pragma once

#include <cstddef>
#include <functional>

namespace cdi {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;  // estimated absolute error bound
    std::size_t evaluations = 0;
};

struct QuadOptions {
    double abs_tol = 1e-10;
    double rel_tol = 1e-12;
    std::size_t max_segments = 20000;
};

/// Gauss-Kronrod 7-15 rule on a single interval.
QuadResult gauss_kronrod_15(const std::function<double(double)>& f, double a, double b);

/// Visits the 15 Kronrod nodes of [a, b] with their quadrature weights
/// (already scaled by the interval half-width). Used to build frozen node
/// tables for repeated kernel integrals.
void for_each_gk15_node(double a, double b, const std::function<void(double, double)>& fn);

/// Globally adaptive bisection (worst-segment-first) for integrands smooth in
/// the interior of [a, b]. Throws QuadratureError when the tolerance cannot be
/// met within the segment budget.
QuadResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                              const QuadOptions& opt = {});

/// Integration on (a, b) for integrands with (integrable) endpoint
/// singularities or many-decade structure near the endpoints: the interval is
/// pre-split on a geometric grid shrinking toward both endpoints, the
/// remaining geometric tails are closed by extrapolation of the observed
/// contraction ratio, and the resulting segments are refined adaptively.
/// The integrand is never evaluated at a or b.
QuadResult integrate_endpoint_graded(const std::function<double(double)>& f, double a, double b,
                                     const QuadOptions& opt = {});

}  // namespace cdi

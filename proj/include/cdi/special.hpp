#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

// Stable scalar kernels shared by the measure, rates, speed and simulation code.
// Everything here is a pure function of its arguments.

namespace cdi {

/// Neumaier compensated accumulator. Keeps long sums of mixed-magnitude
/// terms accurate to a few ulps.
struct CompensatedSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double x) {
        double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

inline double log_binom(double n, double k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

inline double log_beta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

/// (e^{-y} - 1 + y) / y^2, the bounded profile of the psi integrand.
/// Decreasing from 1/2 at y = 0 to ~1/y at infinity.
inline double exp_remainder_profile(double y) {
    if (y < 0.05) {
        // Horner on sum_{k>=0} (-y)^k / (k+2)!, truncated where terms fall
        // below 1e-18 relative for y <= 0.05.
        const double c[9] = {1.0 / 2, -1.0 / 6, 1.0 / 24, -1.0 / 120, 1.0 / 720,
                             -1.0 / 5040, 1.0 / 40320, -1.0 / 362880, 1.0 / 3628800};
        double r = c[8];
        for (int k = 7; k >= 0; --k) r = r * y + c[k];
        return r;
    }
    return (std::expm1(-y) + y) / (y * y);
}

/// e^{-y} - 1 + y, stable for all y >= 0.
inline double exp_remainder(double y) {
    if (y < 0.05) return y * y * exp_remainder_profile(y);
    return std::expm1(-y) + y;
}

/// E[K - 1{K>0}] for K ~ Binomial(b, x):  b x - 1 + (1-x)^b.
/// This is also the integrand kernel of the gamma_b identity. Stable down to
/// values ~ C(b,2) x^2 when b x is tiny.
inline double binomial_excess_mean(double b, double x) {
    double bx = b * x;
    if (bx < 1e-4) {
        // C(b,2) x^2 - C(b,3) x^3 + C(b,4) x^4 - C(b,5) x^5
        double c2 = 0.5 * b * (b - 1.0);
        double t = c2 * x * x;
        double r = t;
        t *= -(b - 2.0) * x / 3.0; r += t;
        t *= -(b - 3.0) * x / 4.0; r += t;
        t *= -(b - 4.0) * x / 5.0; r += t;
        return r;
    }
    double w = b * std::log1p(-x);
    return std::expm1(w) + bx;
}

/// P(K >= 2) for K ~ Binomial(b, x):  1 - (1-x)^b - b x (1-x)^{b-1}.
/// Equals x^2 * (total merger rate kernel). Stable for tiny b x.
inline double prob_two_or_more(double b, double x) {
    if (x >= 1.0) return 1.0;
    double m = b - 1.0;
    double bx = b * x;
    if (bx < 1e-4) {
        double c2 = 0.5 * b * (b - 1.0);
        double t = c2 * x * x;
        double r = t;
        t *= -2.0 * (b - 2.0) * x / 3.0;
        r += t;
        r += c2 * x * x * ((b - 2.0) * (b - 3.0) / 4.0) * x * x;
        return r;
    }
    double u = std::log1p(m * x) + m * std::log1p(-x);  // <= 0
    return -std::expm1(u);
}

/// log pmf of Binomial(n, p) at k.
inline double log_binomial_pmf(long n, long k, double p) {
    if (p <= 0.0) return k == 0 ? 0.0 : -INFINITY;
    if (p >= 1.0) return k == n ? 0.0 : -INFINITY;
    return log_binom(double(n), double(k)) + double(k) * std::log(p) +
           double(n - k) * std::log1p(-p);
}

/// Regularized incomplete beta function I_x(a, b).
double incomplete_beta(double a, double b, double x);

/// log(sum(exp(v))) without overflow; -inf for an empty or all -inf input.
double log_sum_exp(const std::vector<double>& v);

}  // namespace cdi

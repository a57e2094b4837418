#include "cdi/rng.hpp"

#include "cdi/errors.hpp"
#include "cdi/special.hpp"

namespace cdi {

long binomial_draw(Xoshiro256ss& rng, long n, double p) {
    if (n <= 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n;
    if (p > 0.5) return n - binomial_draw(rng, n, 1.0 - p);

    double np = double(n) * p;
    double odds = p / (1.0 - p);
    if (np <= 30.0) {
        double pmf = std::exp(double(n) * std::log1p(-p));
        double cdf = pmf;
        double u = rng.uniform01();
        long k = 0;
        while (u > cdf && k < n) {
            pmf *= double(n - k) / double(k + 1) * odds;
            ++k;
            cdf += pmf;
            if (pmf <= 0.0) break;
        }
        return k;
    }

    // mode-centered two-sided inversion walk
    long mode = long((double(n) + 1.0) * p);
    if (mode > n) mode = n;
    double pm = std::exp(log_binomial_pmf(n, mode, p));
    double u = rng.uniform01();
    double acc = pm;
    if (u <= acc) return mode;
    long lo = mode, hi = mode;
    double plo = pm, phi = pm;
    while (lo > 0 || hi < n) {
        double next_hi = hi < n ? phi * double(n - hi) / double(hi + 1) * odds : 0.0;
        double next_lo = lo > 0 ? plo * double(lo) / (double(n - lo + 1) * odds) : 0.0;
        if (next_hi <= 0.0 && next_lo <= 0.0) break;
        if (next_hi >= next_lo) {
            ++hi;
            phi = next_hi;
            acc += phi;
            if (u <= acc) return hi;
        } else {
            --lo;
            plo = next_lo;
            acc += plo;
            if (u <= acc) return lo;
        }
    }
    return mode;  // u fell in the ~1 ulp of unaccounted tail mass
}

long binomial_draw_ge2(Xoshiro256ss& rng, long n, double p) {
    if (n < 2) throw DomainError("binomial_draw_ge2 requires n >= 2");
    if (p >= 1.0) return n;
    if (!(p > 0.0)) throw DomainError("binomial_draw_ge2 requires p > 0");

    double two_plus = prob_two_or_more(double(n), p);
    if (two_plus >= 0.2) {
        for (int attempt = 0; attempt < 10000; ++attempt) {
            long k = binomial_draw(rng, n, p);
            if (k >= 2) return k;
        }
        throw SamplingError("binomial_draw_ge2: rejection budget exhausted");
    }

    // low-mass regime: inversion over {2..n}, concentrated near 2
    double u = rng.uniform01() * two_plus;
    double pmf = std::exp(log_binomial_pmf(n, 2, p));
    double odds = p / (1.0 - p);
    double cdf = pmf;
    long k = 2;
    while (u > cdf && k < n) {
        pmf *= double(n - k) / double(k + 1) * odds;
        ++k;
        cdf += pmf;
        if (pmf <= 0.0) break;
    }
    return k;
}

}  // namespace cdi

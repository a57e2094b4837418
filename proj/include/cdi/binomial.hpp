#pragma once

#include <string>
#include <vector>

namespace cdi {

/// Closed-form moments of Y = X - 1{X>0} for X ~ Binomial(n, p).
struct BinomialMoments {
    long n = 0;
    double p = 0;
    double ey = 0;     // n p - 1 + (1-p)^n
    double var_y = 0;  // n p (1-p) + (1-p)^n (1-(1-p)^n) - 2 n p (1-p)^n
    double ey2 = 0;    // -n p - n p^2 + n^2 p^2 + 1 - (1-p)^n
};

BinomialMoments moments_closed_form(long n, double p);

/// Exact moments of T = log(X + 1{X<n}) - log n for X ~ Binomial(n, 1-p),
/// by stable enumeration of the mass function. n above 1e4 raises
/// EnumerationLimitError.
struct LogMoments {
    double e_t = 0;
    double e_t2 = 0;
};
LogMoments log_moment_exact(long n, double p);

/// Result of a uniform-boundedness sweep over a grid.
struct BoundSweep {
    double sup_ratio = 0;  // empirical constant
    bool pass = false;     // sup within the frozen baseline
    long argmax_n = 0;
    double argmax_p = 0;
};

/// |E T + (np - 1 + (1-p)^n)/n| / p^2 and E T^2 / p^2 across the grid.
BoundSweep verify_drift_bound(const std::vector<long>& n_grid, const std::vector<double>& p_grid,
                              double baseline);

/// E[((n - Y)/n)^2] / p^2 for Y = X + 1{X<n}, X ~ Binomial(n, 1-p).
BoundSweep verify_secmom_bound(const std::vector<long>& n_grid, const std::vector<double>& p_grid,
                               double baseline);

/// E[exp(c T^2) - 1] / (e^{9c/4} p^2) across the (n, p, c) grid; computed in
/// log space end to end.
BoundSweep verify_expmoment_bound(const std::vector<long>& n_grid,
                                  const std::vector<double>& p_grid,
                                  const std::vector<double>& c_grid, double baseline);

/// P(Y > n/2) <= 2^n p^{n/2} (1-p)^{n/2} for Y ~ Binomial(n, p), verified by
/// exact log-space tail sums on the grid.
bool verify_large_deviation_bound(const std::vector<long>& n_grid,
                                  const std::vector<double>& p_grid);

/// |log(1-x) + x| <= x^2 on a dense grid of [0, 1/2].
bool verify_log_calculus_inequality(int grid_points = 4096);

// Canonical dyadic grids (n in {32..4096}, p in {2^-2..2^-14}, c in {1/4..8})
// and the empirical constants measured on them, frozen with 10% slack.
std::vector<long> canonical_n_grid();
std::vector<double> canonical_p_grid();
std::vector<double> canonical_c_grid();

extern const double kFrozenDriftBound;
extern const double kFrozenSecondMomentBound;
extern const double kFrozenExpMomentBound;

struct AppendixReport {
    BoundSweep drift, secmom, expmoment;
    bool closed_form_vs_enumeration = false;
    bool large_deviation = false;
    bool calculus_inequality = false;
    bool all_pass() const {
        return drift.pass && secmom.pass && expmoment.pass && closed_form_vs_enumeration &&
               large_deviation && calculus_inequality;
    }
};

/// Full appendix verification on the canonical grids.
AppendixReport run_appendix_suite();
std::string appendix_report_to_json(const AppendixReport& report);

}  // namespace cdi

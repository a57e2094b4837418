#pragma once

#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "cdi/measure.hpp"

namespace cdi {

/// One state row of the block-counting jump kernel: log weights of
/// C(b,k) lambda_{b,k} over merger sizes k = 2..b, the total jump rate, and
/// gamma_b = sum_k (k-1) C(b,k) lambda_{b,k}.
struct RateRow {
    long block_count = 0;
    std::vector<double> log_weights;  // index i holds k = i + 2; -inf marks zero weight
    double total_rate = 0.0;
    double gamma = 0.0;
    std::vector<double> cum_prob;  // cumulative merger-size probabilities

    /// Merger size drawn by inverse transform from a uniform variate.
    long sample_merger_size(double u01) const;
    double prob(long k) const;
};

/// lambda_{b,k} = integral of x^{k-2} (1-x)^{b-k} against Lambda, by adaptive
/// quadrature (the atom at 0 contributes exactly when k = 2, the atom at 1
/// exactly when k = b).
double lambda_bk(const LambdaSpec& spec, long b, long k, double tol = 1e-10);

/// Closed-form lambda_{b,k} for the dirac0 / uniform / beta / interior-atom
/// families (throws UnsupportedMeasureError for pointwise densities).
double lambda_bk_closed(const LambdaSpec& spec, long b, long k);
bool has_closed_rates(const LambdaSpec& spec);

/// gamma_b computed two ways -- log-space direct summation over k and the
/// single-quadrature binomial identity -- cross-checked to 1e-6 relative.
double gamma_b(const LambdaSpec& spec, long b);

/// Identity route only: gamma_b = atom0 C(b,2) + integral of
/// (b x - 1 + (1-x)^b) against nu. Defined for real b >= 2.
double gamma_b_integral(const LambdaSpec& spec, double b);

/// Full jump kernel at state b. Total rate is cross-checked against the
/// single-quadrature identity sum_k C(b,k) x^{k-2} (1-x)^{b-k} =
/// x^{-2} (1 - (1-x)^b - b x (1-x)^{b-1}) to 1e-8 relative.
RateRow merger_distribution(const LambdaSpec& spec, long b);

enum class Confidence { proved_numeric, heuristic };

struct CdiClassification {
    bool comes_down = false;
    double schweinsberg_partial = 0.0;  // sum_{b<=b_max} 1/gamma_b
    double grey_partial = 0.0;          // integral_1^{q_max} dq/psi
    Confidence confidence = Confidence::heuristic;
    double gamma_exponent_limit = 0.0;  // extrapolated local exponent of gamma_b
    double psi_exponent_limit = 0.0;    // extrapolated local exponent of psi
};

/// Classifies coming down from infinity by both criteria; they must agree
/// (CriteriaDisagreementError otherwise). Measures with an atom at 1 are
/// rejected. The verdict is heuristic-confidence unless both local exponents
/// stay above 1.05 with negligible drift.
CdiClassification cdi_classify(const LambdaSpec& spec, long b_max = 100000, double q_max = 1e8);

class NuKernelTable;

/// Read-mostly cache of rate rows keyed by block count; insertion is
/// mutex-guarded and idempotent, lookups return stable references.
class RateRowCache {
  public:
    explicit RateRowCache(LambdaSpec spec);
    ~RateRowCache();
    const RateRow& row(long b);
    const LambdaSpec& spec() const { return spec_; }

  private:
    LambdaSpec spec_;
    std::mutex mu_;
    std::unique_ptr<NuKernelTable> table_;
    std::unordered_map<long, std::unique_ptr<RateRow>> rows_;
};

}  // namespace cdi

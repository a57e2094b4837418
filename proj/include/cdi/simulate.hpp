#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cdi/measure.hpp"
#include "cdi/rates.hpp"
#include "cdi/rng.hpp"

namespace cdi {

enum class SimBackend { direct_k, x_binomial, auto_select };

constexpr double kUntilAbsorption = std::numeric_limits<double>::infinity();

/// One realization of the block-counting chain: strictly increasing jump
/// times with strictly decreasing block counts.
struct BlockCountPath {
    long initial_n = 0;
    std::vector<std::pair<double, long>> events;  // (time, new count)
    std::uint64_t seed = 0;
    std::uint64_t measure_id = 0;
    SimBackend backend = SimBackend::direct_k;
    double horizon = kUntilAbsorption;
    bool absorbed = false;

    /// Block count at time t (t = 0 gives initial_n). Throws RangeError past
    /// the horizon of a non-absorbed path.
    long count_at(double t) const;
    double absorption_time() const;  // time of the final merger (absorbed paths)
};

/// Thinning proposal tables for the impact-fraction backend: candidate
/// impacts x are drawn from the pointwise envelope
///   min(C(b,2), x^{-2}) Lambda_cont(dx)
/// materialized on a geometric cell grid (per-cell sup density), and accepted
/// with probability P(Binomial(b,x) >= 2) / envelope. Built once per measure;
/// read-only afterwards.
class ImpactSampler {
  public:
    explicit ImpactSampler(const LambdaSpec& spec);

    bool usable() const { return usable_; }

    /// Envelope rate of non-Kingman candidates at state b.
    double envelope_rate(long b) const;

    struct Proposal {
        double x;
        double accept;  // thinning acceptance probability
    };
    Proposal propose(long b, Xoshiro256ss& rng) const;

  private:
    struct Breakdown {
        std::size_t straddle;  // cell index containing x_b, or cell count if none
        double atoms, below, mid, above, total;
    };
    Breakdown breakdown(long b) const;
    double cell_position(std::size_t idx, double u) const;

    LambdaSpec spec_;
    bool usable_ = false;
    std::vector<double> edge_;        // cell edges, increasing, size m+1
    std::vector<double> sup_mass_;    // per-cell sup of the density
    std::vector<double> sup_nu_;      // per-cell sup of density / x^2
    std::vector<double> mass_env_;    // per-cell envelope masses (sup * width)
    std::vector<double> nu_env_;
    std::vector<double> mass_pre_;    // prefix sums of mass_env_
    std::vector<double> nu_suf_;      // suffix sums of nu_env_
    bool top_closure_ = false;        // last cell sampled by its exact power shape
    double floor_mass_ = 0.0;         // exact continuous mass below edge_[0]
    std::vector<double> atom_x_, atom_m_;
};

struct SimulateOptions {
    SimBackend backend = SimBackend::auto_select;
    RateRowCache* row_cache = nullptr;       // optional shared cache (direct_k)
    const ImpactSampler* sampler = nullptr;  // optional shared tables (x_binomial)
    long direct_k_auto_limit = 1024;         // auto backend switch point
};

/// Exact continuous-time simulation of the block-counting chain started from
/// n blocks, run until the horizon or absorption at one block.
BlockCountPath simulate_path(const LambdaSpec& spec, long n, double horizon, std::uint64_t seed,
                             const SimulateOptions& options = {});

/// integral of the block count over [a, b] (piecewise-constant, exact).
/// Absorbed paths contribute count 1 past absorption.
double tree_length(const BlockCountPath& path, double a, double b);

/// First time the count is <= n0; 0 when the path starts there; nullopt when
/// a horizon-limited path never reaches n0.
std::optional<double> hitting_time(const BlockCountPath& path, long n0);

/// CSV with a one-line schema header, then "time,count" rows.
std::string path_to_csv(const BlockCountPath& path);

}  // namespace cdi

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cdi/measure.hpp"
#include "cdi/simulate.hpp"
#include "cdi/speed.hpp"

namespace cdi {

enum class ExperimentKind {
    speed_ratio,
    moment_ratio,
    tree_length_ratio,
    kingman_extremal,
    drift_check,
    truncation_ratio,
};

std::string experiment_kind_name(ExperimentKind kind);
ExperimentKind experiment_kind_from_name(const std::string& name);

struct ExperimentConfig {
    int schema = 1;
    ExperimentKind kind = ExperimentKind::speed_ratio;
    LambdaSpec measure;
    std::string measure_label;  // free-form tag echoed into reports

    long n = 100000;            // top block count (drift_check: ladder top)
    double s = 0.1;             // observation window (time)
    int replicas = 200;
    std::vector<int> d_list{1, 2, 4};       // moment orders (moment_ratio)
    double epsilon = 0.05;                  // pass threshold (kind-specific meaning)
    std::uint64_t master_seed = 42;
    std::vector<long> n_ladder{1000, 10000, 100000};
    std::vector<double> s_ladder{0.2, 0.1, 0.05};
    double eta = 0.25;          // truncation level (truncation_ratio)
    double t_lo_factor = 10.0;  // observation floor = factor * u(n)

    // speed table parameters (provenance recorded in every report)
    double q_min = 1.0;
    double q_max = 1e10;
    int points_per_decade = 64;

    int threads = 0;  // 0: CDI_LAB_THREADS env or hardware concurrency
};

struct RungStats {
    std::string label;
    std::vector<double> per_replica;
    std::vector<std::uint64_t> seeds;
    double mean = 0, sd = 0, min = 0, max = 0, q05 = 0, q50 = 0, q95 = 0;
};

struct ExperimentReport {
    int schema = 1;
    ExperimentConfig config;
    std::string measure_id_hex;
    bool has_table = false;
    double table_q_min = 0, table_q_max = 0, table_tol = 0, table_tail_exponent = 0;
    int table_points_per_decade = 0;
    std::vector<RungStats> rungs;
    bool pass = false;
    std::string detail;            // human-readable pass/fail reasoning
    double wall_seconds = 0;       // volatile; excluded from the canonical JSON
};

/// Runs the configured experiment. Replica statistics depend only on
/// (master_seed, rung, replica); aggregation is a deterministic fold, so
/// reports are byte-identical across runs and thread counts.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// Canonical JSON serialization (no wall time, fixed key order).
std::string report_to_json(const ExperimentReport& report);

/// Per-replica rows: rung,replica,seed,statistic.
std::string report_to_csv(const ExperimentReport& report);

ExperimentConfig config_from_json(const std::string& json_text);
std::string config_to_json(const ExperimentConfig& config);

/// Worker pool helper: deterministic results regardless of thread count.
void parallel_for(int count, int threads, const std::function<void(int)>& body);
int resolve_threads(int requested);

/// sup over t in [t_lo, t_hi] of |N(t)/v(t_n + t) - 1|; exact because the
/// count is piecewise constant and v monotone, so each piece attains its
/// extremes at its endpoints.
double sup_ratio_deviation(const BlockCountPath& path, const SpeedTable& table, double t_n,
                           double t_lo, double t_hi);

}  // namespace cdi

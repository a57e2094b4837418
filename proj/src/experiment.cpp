#include "cdi/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "cdi/errors.hpp"
#include "cdi/quadrature.hpp"
#include "cdi/rates.hpp"
#include "cdi/rng.hpp"
#include "cdi/special.hpp"

namespace cdi {

std::string experiment_kind_name(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::speed_ratio: return "speed_ratio";
        case ExperimentKind::moment_ratio: return "moment_ratio";
        case ExperimentKind::tree_length_ratio: return "tree_length_ratio";
        case ExperimentKind::kingman_extremal: return "kingman_extremal";
        case ExperimentKind::drift_check: return "drift_check";
        case ExperimentKind::truncation_ratio: return "truncation_ratio";
    }
    return "speed_ratio";
}

ExperimentKind experiment_kind_from_name(const std::string& name) {
    for (auto k : {ExperimentKind::speed_ratio, ExperimentKind::moment_ratio,
                   ExperimentKind::tree_length_ratio, ExperimentKind::kingman_extremal,
                   ExperimentKind::drift_check, ExperimentKind::truncation_ratio})
        if (experiment_kind_name(k) == name) return k;
    throw DomainError("unknown experiment kind: " + name);
}

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("CDI_LAB_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc ? int(hc) : 1;
}

void parallel_for(int count, int threads, const std::function<void(int)>& body) {
    threads = std::min(threads, count);
    if (threads <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                int i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mu);
                    if (!error) error = std::current_exception();
                    next.store(count);
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

namespace {

// ---- statistics ----------------------------------------------------------

void finalize_rung(RungStats& r) {
    const std::size_t n = r.per_replica.size();
    if (n == 0) return;
    CompensatedSum s;
    for (double v : r.per_replica) s.add(v);
    r.mean = s.value() / double(n);
    CompensatedSum var;
    for (double v : r.per_replica) var.add((v - r.mean) * (v - r.mean));
    r.sd = n > 1 ? std::sqrt(var.value() / double(n - 1)) : 0.0;
    std::vector<double> sorted(r.per_replica);
    std::sort(sorted.begin(), sorted.end());
    r.min = sorted.front();
    r.max = sorted.back();
    auto quantile = [&sorted](double q) {
        double pos = q * double(sorted.size() - 1);
        std::size_t i = std::size_t(pos);
        double frac = pos - double(i);
        if (i + 1 >= sorted.size()) return sorted.back();
        return sorted[i] * (1.0 - frac) + sorted[i + 1] * frac;
    };
    r.q05 = quantile(0.05);
    r.q50 = quantile(0.50);
    r.q95 = quantile(0.95);
}

}  // namespace

/// The count is piecewise constant and v decreasing, so the ratio is monotone
/// between jumps and the supremum is attained at piece endpoints.
double sup_ratio_deviation(const BlockCountPath& path, const SpeedTable& table, double t_n,
                           double t_lo, double t_hi) {
    double sup = 0.0;
    auto visit = [&](double t, long count) {
        double v = table.v(t_n + t);
        sup = std::max(sup, std::abs(double(count) / v - 1.0));
    };
    double piece_start = 0.0;
    long count = path.initial_n;
    auto clip_piece = [&](double piece_end) {
        double lo = std::max(piece_start, t_lo);
        double hi = std::min(piece_end, t_hi);
        if (lo <= hi) {
            visit(lo, count);
            visit(hi, count);
        }
    };
    for (auto& [tt, cc] : path.events) {
        clip_piece(tt);
        piece_start = tt;
        count = cc;
        if (piece_start > t_hi) break;
    }
    clip_piece(t_hi);
    return sup;
}

namespace {

/// min over t in [t_lo, t_hi] of (t_n + t) N(t) / 2; increasing between
/// jumps, so the minimum sits at piece left endpoints.
double min_half_t_count(const BlockCountPath& path, double t_n, double t_lo, double t_hi) {
    double mn = std::numeric_limits<double>::infinity();
    double piece_start = 0.0;
    long count = path.initial_n;
    auto clip_piece = [&](double piece_end) {
        double lo = std::max(piece_start, t_lo);
        if (lo <= std::min(piece_end, t_hi)) mn = std::min(mn, (t_n + lo) * double(count) / 2.0);
    };
    for (auto& [tt, cc] : path.events) {
        clip_piece(tt);
        piece_start = tt;
        count = cc;
        if (piece_start > t_hi) break;
    }
    clip_piece(t_hi);
    return mn;
}

/// integral of v over [t_n, t_n + s] on geometric panels.
double integral_of_v(const SpeedTable& table, double t_n, double s) {
    double lo = t_n, hi = t_n + s;
    int panels = std::max(8, int(std::ceil(32.0 * std::log10(hi / lo))));
    double step = (std::log(hi) - std::log(lo)) / panels;
    CompensatedSum acc;
    auto f = [&table](double r) {
        double t = std::exp(r);
        return t * table.v(t);
    };
    for (int j = 0; j < panels; ++j)
        acc.add(gauss_kronrod_15(f, std::log(lo) + j * step, std::log(lo) + (j + 1) * step).value);
    return acc.value();
}

struct Prepared {
    PsiEvaluator psi;
    SpeedTable table;
    RateRowCache cache;
    ImpactSampler sampler;

    explicit Prepared(const ExperimentConfig& cfg)
        : psi(cfg.measure),
          table(build_speed_table(psi, cfg.q_min, cfg.q_max, cfg.points_per_decade)),
          cache(cfg.measure),
          sampler(cfg.measure) {}
};

void echo_table(ExperimentReport& rep, const SpeedTable& t) {
    rep.has_table = true;
    rep.table_q_min = t.q_min();
    rep.table_q_max = t.q_max();
    rep.table_tol = t.claimed_tol();
    rep.table_tail_exponent = t.tail_exponent();
    rep.table_points_per_decade = t.points_per_decade();
}

SimulateOptions sim_options(Prepared& prep) {
    SimulateOptions opt;
    opt.row_cache = &prep.cache;
    opt.sampler = &prep.sampler;
    return opt;
}

// ---- the experiments -----------------------------------------------------

ExperimentReport run_speed_ratio(const ExperimentConfig& cfg) {
    ExperimentReport rep;
    Prepared prep(cfg);
    echo_table(rep, prep.table);
    SimulateOptions opt = sim_options(prep);
    int threads = resolve_threads(cfg.threads);

    for (std::size_t rung = 0; rung < cfg.n_ladder.size(); ++rung) {
        long n = cfg.n_ladder[rung];
        double t_n = prep.table.u(double(n));
        double t_lo = cfg.t_lo_factor * t_n;
        if (!(t_lo < cfg.s))
            throw DomainError("observation window empty: t_lo_factor*u(n) >= s at n=" +
                              std::to_string(n));
        RungStats rs;
        rs.label = "n=" + std::to_string(n);
        rs.per_replica.resize(cfg.replicas);
        rs.seeds.resize(cfg.replicas);
        parallel_for(cfg.replicas, threads, [&](int r) {
            std::uint64_t seed = derive_seed(cfg.master_seed, rung, std::uint64_t(r));
            rs.seeds[r] = seed;
            auto path = simulate_path(cfg.measure, n, cfg.s, seed, opt);
            rs.per_replica[r] = sup_ratio_deviation(path, prep.table, t_n, t_lo, cfg.s);
        });
        finalize_rung(rs);
        rep.rungs.push_back(std::move(rs));
    }

    bool decreasing = true;
    for (std::size_t i = 1; i < rep.rungs.size(); ++i)
        decreasing = decreasing && rep.rungs[i].mean < rep.rungs[i - 1].mean;
    double top = rep.rungs.back().mean;
    rep.pass = decreasing && top < cfg.epsilon;
    std::ostringstream d;
    d << "mean sup-deviation " << (decreasing ? "decreases" : "does NOT decrease")
      << " along the n-ladder; top rung mean " << top << (top < cfg.epsilon ? " < " : " >= ")
      << cfg.epsilon;
    rep.detail = d.str();
    return rep;
}

ExperimentReport run_moment_ratio(const ExperimentConfig& cfg) {
    ExperimentReport rep;
    Prepared prep(cfg);
    echo_table(rep, prep.table);
    SimulateOptions opt = sim_options(prep);
    int threads = resolve_threads(cfg.threads);
    double t_n = prep.table.u(double(cfg.n));

    std::vector<std::vector<double>> sups(cfg.s_ladder.size());
    std::vector<std::vector<std::uint64_t>> seeds(cfg.s_ladder.size());
    for (std::size_t rung = 0; rung < cfg.s_ladder.size(); ++rung) {
        double s = cfg.s_ladder[rung];
        sups[rung].resize(cfg.replicas);
        seeds[rung].resize(cfg.replicas);
        parallel_for(cfg.replicas, threads, [&, rung, s](int r) {
            std::uint64_t seed = derive_seed(cfg.master_seed, rung, std::uint64_t(r));
            seeds[rung][r] = seed;
            auto path = simulate_path(cfg.measure, cfg.n, s, seed, opt);
            sups[rung][r] = sup_ratio_deviation(path, prep.table, t_n, 0.0, s);
        });
    }

    bool all_decreasing = true;
    for (int d : cfg.d_list) {
        double prev_mean = std::numeric_limits<double>::infinity();
        for (std::size_t rung = 0; rung < cfg.s_ladder.size(); ++rung) {
            RungStats rs;
            rs.label = "s=" + std::to_string(cfg.s_ladder[rung]) + ",d=" + std::to_string(d);
            rs.seeds = seeds[rung];
            rs.per_replica.resize(cfg.replicas);
            for (int r = 0; r < cfg.replicas; ++r)
                rs.per_replica[r] = std::pow(sups[rung][r], double(d));
            finalize_rung(rs);
            if (!(rs.mean < prev_mean)) all_decreasing = false;
            prev_mean = rs.mean;
            rep.rungs.push_back(std::move(rs));
        }
    }
    rep.pass = all_decreasing;
    rep.detail = all_decreasing
                     ? "E sup^d decreases along the s-ladder for every requested d"
                     : "E sup^d fails to decrease along the s-ladder for some d";
    return rep;
}

ExperimentReport run_tree_length_ratio(const ExperimentConfig& cfg) {
    ExperimentReport rep;
    Prepared prep(cfg);
    echo_table(rep, prep.table);
    SimulateOptions opt = sim_options(prep);
    int threads = resolve_threads(cfg.threads);

    for (std::size_t rung = 0; rung < cfg.n_ladder.size(); ++rung) {
        long n = cfg.n_ladder[rung];
        double t_n = prep.table.u(double(n));
        double iv = integral_of_v(prep.table, t_n, cfg.s);
        RungStats rs;
        rs.label = "n=" + std::to_string(n);
        rs.per_replica.resize(cfg.replicas);
        rs.seeds.resize(cfg.replicas);
        parallel_for(cfg.replicas, threads, [&](int r) {
            std::uint64_t seed = derive_seed(cfg.master_seed, rung, std::uint64_t(r));
            rs.seeds[r] = seed;
            auto path = simulate_path(cfg.measure, n, cfg.s, seed, opt);
            rs.per_replica[r] = tree_length(path, 0.0, cfg.s) / iv;
        });
        finalize_rung(rs);
        rep.rungs.push_back(std::move(rs));
    }

    double top_mean = rep.rungs.back().mean;
    bool sd_shrinks = rep.rungs.back().sd < rep.rungs.front().sd;
    rep.pass = std::abs(top_mean - 1.0) < cfg.epsilon && sd_shrinks;
    std::ostringstream d;
    d << "top-rung mean ratio " << top_mean << " (target 1 +- " << cfg.epsilon << "); sd "
      << (sd_shrinks ? "shrinks" : "does NOT shrink") << " along the ladder"
      << "; cv(top) = " << rep.rungs.back().sd / top_mean;
    rep.detail = d.str();
    return rep;
}

ExperimentReport run_kingman_extremal(const ExperimentConfig& cfg) {
    if (std::abs(cfg.measure.total_mass - 1.0) > 1e-9)
        throw DomainError("kingman_extremal requires a unit-mass measure");
    ExperimentReport rep;
    Prepared prep(cfg);
    echo_table(rep, prep.table);
    SimulateOptions opt = sim_options(prep);
    int threads = resolve_threads(cfg.threads);

    // deterministic half: v(t) >= 2/t on the resolvable grid
    bool v_bound_ok = true;
    double worst = std::numeric_limits<double>::infinity();
    for (double t = prep.table.u_at_qmax() * 1.01; t < prep.table.u_at_qmin() * 0.99; t *= 1.3) {
        double ratio = prep.table.v(t) * t / 2.0;
        worst = std::min(worst, ratio);
        if (ratio < 1.0 - 1e-9) v_bound_ok = false;
    }

    for (std::size_t rung = 0; rung < cfg.n_ladder.size(); ++rung) {
        long n = cfg.n_ladder[rung];
        double t_n = prep.table.u(double(n));
        double t_lo = cfg.t_lo_factor * t_n;
        if (!(t_lo < cfg.s))
            throw DomainError("observation window empty at n=" + std::to_string(n));
        RungStats rs;
        rs.label = "n=" + std::to_string(n);
        rs.per_replica.resize(cfg.replicas);
        rs.seeds.resize(cfg.replicas);
        parallel_for(cfg.replicas, threads, [&](int r) {
            std::uint64_t seed = derive_seed(cfg.master_seed, rung, std::uint64_t(r));
            rs.seeds[r] = seed;
            auto path = simulate_path(cfg.measure, n, cfg.s, seed, opt);
            rs.per_replica[r] = min_half_t_count(path, t_n, t_lo, cfg.s);
        });
        finalize_rung(rs);
        rep.rungs.push_back(std::move(rs));
    }

    double top_mean = rep.rungs.back().mean;
    rep.pass = v_bound_ok && top_mean >= 1.0 - cfg.epsilon;
    std::ostringstream d;
    d << "deterministic v(t) t/2 >= 1: " << (v_bound_ok ? "holds" : "VIOLATED")
      << " (min " << worst << "); top-rung mean of min_t (t_n+t) N/2 = " << top_mean
      << " vs threshold " << 1.0 - cfg.epsilon;
    rep.detail = d.str();
    return rep;
}

ExperimentReport run_drift_check(const ExperimentConfig& cfg) {
    // standing assumption of the drift estimate: support inside [0, 1/4]
    const LambdaSpec& m = cfg.measure;
    bool supp_ok = !m.has_continuous_density() || m.eta <= 0.25;
    for (auto& [x, mass] : m.atoms) supp_ok = supp_ok && x <= 0.25;
    if (!supp_ok)
        throw DomainError("drift_check requires supp(Lambda) inside [0, 1/4]");

    ExperimentReport rep;
    PsiEvaluator psi(m);
    RateRowCache cache(m);

    std::vector<long> rungs;
    for (double x = 100.0; x < double(cfg.n) * 0.999; x *= std::sqrt(10.0))
        rungs.push_back(long(std::llround(x)));
    rungs.push_back(cfg.n);

    double worst = 0.0;
    for (std::size_t i = 0; i < rungs.size(); ++i) {
        long n = rungs[i];
        const RateRow& row = cache.row(n);
        CompensatedSum drift;
        for (long k = 2; k <= n; ++k) {
            double w = std::exp(row.log_weights[k - 2]);
            if (w > 0.0) drift.add(w * std::log(double(n - k + 1) / double(n)));
        }
        double delta = drift.value() + psi.psi(double(n)) / double(n);
        RungStats rs;
        rs.label = "n=" + std::to_string(n);
        rs.per_replica = {delta};
        rs.seeds = {0};
        finalize_rung(rs);
        rep.rungs.push_back(std::move(rs));
        if (n >= 32) worst = std::max(worst, std::abs(delta));
    }
    rep.pass = worst <= cfg.epsilon;
    std::ostringstream d;
    d << "sup_n |exact drift + psi(n)/n| = " << worst << " over the ladder (threshold "
      << cfg.epsilon << ")";
    rep.detail = d.str();
    return rep;
}

ExperimentReport run_truncation_ratio(const ExperimentConfig& cfg) {
    if (!(cfg.eta > 0.0) || !(cfg.eta < 1.0))
        throw DomainError("truncation_ratio requires eta in (0,1)");
    ExperimentReport rep;
    Prepared prep(cfg);
    echo_table(rep, prep.table);

    LambdaSpec cut = truncate(cfg.measure, cfg.eta);
    PsiEvaluator psi_cut(cut);
    SpeedTable table_cut = build_speed_table(psi_cut, cfg.q_min, cfg.q_max,
                                             cfg.points_per_decade);

    std::vector<double> grid{100.0 * cfg.s, 10.0 * cfg.s, cfg.s};
    for (double t : grid) {
        RungStats rs;
        std::ostringstream label;
        label << "t=" << t;
        rs.label = label.str();
        rs.per_replica = {prep.table.v(t) / table_cut.v(t)};
        rs.seeds = {0};
        finalize_rung(rs);
        rep.rungs.push_back(std::move(rs));
    }
    double smallest_t_ratio = rep.rungs.back().mean;
    bool monotone = true;
    for (std::size_t i = 1; i < rep.rungs.size(); ++i)
        monotone = monotone && rep.rungs[i].mean >= rep.rungs[i - 1].mean - 1e-9;
    bool in_range = smallest_t_ratio > 1.0 - cfg.epsilon && smallest_t_ratio <= 1.0 + 1e-9;
    rep.pass = monotone && in_range;
    std::ostringstream d;
    d << "v/v_eta at t=" << cfg.s << " is " << smallest_t_ratio << " (target within ("
      << 1.0 - cfg.epsilon << ", 1]); ratios " << (monotone ? "tighten" : "do NOT tighten")
      << " toward 1 as t decreases";
    rep.detail = d.str();
    return rep;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    if (cfg.replicas < 1) throw DomainError("replicas must be >= 1");
    if (!(cfg.s > 0.0)) throw DomainError("observation window s must be positive");
    for (int d : cfg.d_list)
        if (d < 1) throw DomainError("moment order d must be >= 1");

    auto start = std::chrono::steady_clock::now();
    ExperimentReport rep;
    switch (cfg.kind) {
        case ExperimentKind::speed_ratio: rep = run_speed_ratio(cfg); break;
        case ExperimentKind::moment_ratio: rep = run_moment_ratio(cfg); break;
        case ExperimentKind::tree_length_ratio: rep = run_tree_length_ratio(cfg); break;
        case ExperimentKind::kingman_extremal: rep = run_kingman_extremal(cfg); break;
        case ExperimentKind::drift_check: rep = run_drift_check(cfg); break;
        case ExperimentKind::truncation_ratio: rep = run_truncation_ratio(cfg); break;
    }
    rep.schema = 1;
    rep.config = cfg;
    {
        std::ostringstream hex;
        hex << std::hex << content_hash(cfg.measure);
        rep.measure_id_hex = hex.str();
    }
    rep.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

// ---- serialization -------------------------------------------------------

namespace {

nlohmann::ordered_json config_json(const ExperimentConfig& cfg) {
    nlohmann::ordered_json j;
    j["schema"] = cfg.schema;
    j["experiment"] = experiment_kind_name(cfg.kind);
    j["measure"] = nlohmann::ordered_json::parse(measure_to_json(cfg.measure));
    if (!cfg.measure_label.empty()) j["measure_label"] = cfg.measure_label;
    j["n"] = cfg.n;
    j["s"] = cfg.s;
    j["replicas"] = cfg.replicas;
    j["d_list"] = cfg.d_list;
    j["epsilon"] = cfg.epsilon;
    j["master_seed"] = cfg.master_seed;
    j["n_ladder"] = cfg.n_ladder;
    j["s_ladder"] = cfg.s_ladder;
    j["eta"] = cfg.eta;
    j["t_lo_factor"] = cfg.t_lo_factor;
    j["q_min"] = cfg.q_min;
    j["q_max"] = cfg.q_max;
    j["points_per_decade"] = cfg.points_per_decade;
    return j;
}

}  // namespace

std::string report_to_json(const ExperimentReport& rep) {
    nlohmann::ordered_json j;
    j["schema"] = rep.schema;
    j["kind"] = experiment_kind_name(rep.config.kind);
    j["config"] = config_json(rep.config);
    j["measure_id"] = rep.measure_id_hex;
    if (rep.has_table) {
        nlohmann::ordered_json t;
        t["q_min"] = rep.table_q_min;
        t["q_max"] = rep.table_q_max;
        t["points_per_decade"] = rep.table_points_per_decade;
        t["claimed_tol"] = rep.table_tol;
        t["tail_exponent"] = rep.table_tail_exponent;
        j["speed_table"] = t;
    }
    nlohmann::ordered_json rungs = nlohmann::ordered_json::array();
    for (const auto& r : rep.rungs) {
        nlohmann::ordered_json x;
        x["label"] = r.label;
        x["count"] = r.per_replica.size();
        x["mean"] = r.mean;
        x["sd"] = r.sd;
        x["min"] = r.min;
        x["max"] = r.max;
        x["q05"] = r.q05;
        x["q50"] = r.q50;
        x["q95"] = r.q95;
        rungs.push_back(x);
    }
    j["rungs"] = rungs;
    j["pass"] = rep.pass;
    j["detail"] = rep.detail;
    return j.dump(2) + "\n";
}

std::string report_to_csv(const ExperimentReport& rep) {
    std::ostringstream os;
    os << "rung,replica,seed,statistic\n";
    char buf[64];
    for (const auto& r : rep.rungs) {
        for (std::size_t i = 0; i < r.per_replica.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", r.per_replica[i]);
            os << r.label << "," << i << "," << (i < r.seeds.size() ? r.seeds[i] : 0) << ","
               << buf << "\n";
        }
    }
    return os.str();
}

ExperimentConfig config_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DomainError(std::string("malformed experiment config: ") + e.what());
    }
    ExperimentConfig cfg;
    cfg.schema = j.value("schema", 1);
    if (!j.contains("experiment")) throw DomainError("config requires \"experiment\"");
    cfg.kind = experiment_kind_from_name(j["experiment"].get<std::string>());
    if (j.contains("measure"))
        cfg.measure = measure_from_json(j["measure"].dump());
    else if (j.contains("measure_file"))
        cfg.measure = load_measure_file(j["measure_file"].get<std::string>());
    else
        throw DomainError("config requires \"measure\" or \"measure_file\"");
    cfg.measure_label = j.value("measure_label", std::string());
    cfg.n = j.value("n", cfg.n);
    cfg.s = j.value("s", cfg.s);
    cfg.replicas = j.value("replicas", cfg.replicas);
    if (j.contains("d_list")) cfg.d_list = j["d_list"].get<std::vector<int>>();
    cfg.epsilon = j.value("epsilon", cfg.epsilon);
    cfg.master_seed = j.value("master_seed", cfg.master_seed);
    if (j.contains("n_ladder")) cfg.n_ladder = j["n_ladder"].get<std::vector<long>>();
    if (j.contains("s_ladder")) cfg.s_ladder = j["s_ladder"].get<std::vector<double>>();
    cfg.eta = j.value("eta", cfg.eta);
    cfg.t_lo_factor = j.value("t_lo_factor", cfg.t_lo_factor);
    cfg.q_min = j.value("q_min", cfg.q_min);
    cfg.q_max = j.value("q_max", cfg.q_max);
    cfg.points_per_decade = j.value("points_per_decade", cfg.points_per_decade);
    cfg.threads = j.value("threads", 0);
    return cfg;
}

std::string config_to_json(const ExperimentConfig& cfg) { return config_json(cfg).dump(2) + "\n"; }

}  // namespace cdi

#include "cdi/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "cdi/errors.hpp"
#include "cdi/special.hpp"

namespace cdi {

namespace {

constexpr double kXFloor = 1e-16;
constexpr double kWFloor = 1e-12;
constexpr long kMaxSupportedN = 10000000;  // keeps sqrt(2)/b far above the grid floor
constexpr std::size_t kCellsPerSide = 2048;

double c2_of(long b) { return 0.5 * double(b) * double(b - 1); }

}  // namespace

// ---- BlockCountPath ------------------------------------------------------

long BlockCountPath::count_at(double t) const {
    if (t < 0.0) throw DomainError("count_at requires t >= 0");
    if (!absorbed && t > horizon) throw RangeError("count_at beyond the simulated horizon");
    auto it = std::upper_bound(
        events.begin(), events.end(), t,
        [](double tt, const std::pair<double, long>& e) { return tt < e.first; });
    if (it == events.begin()) return initial_n;
    return std::prev(it)->second;
}

double BlockCountPath::absorption_time() const {
    if (!absorbed) throw RangeError("path did not absorb within its horizon");
    return events.empty() ? 0.0 : events.back().first;
}

// ---- ImpactSampler -------------------------------------------------------

ImpactSampler::ImpactSampler(const LambdaSpec& spec) : spec_(spec) {
    if (spec.atom_one > 0.0)
        throw UnsupportedMeasureError("simulation does not support an atom at 1");
    for (auto& [x, m] : spec.atoms) {
        if (x <= spec.eta) {
            atom_x_.push_back(x);
            atom_m_.push_back(m);
        }
    }
    if (!spec.has_continuous_density()) {
        usable_ = !atom_x_.empty();
        return;
    }
    usable_ = true;

    const double top = spec.eta;
    const double mid = std::min(0.5, top);
    edge_.push_back(kXFloor);
    double ratio_lo = std::pow(mid / kXFloor, 1.0 / double(kCellsPerSide));
    for (std::size_t j = 1; j < kCellsPerSide; ++j) edge_.push_back(kXFloor * std::pow(ratio_lo, double(j)));
    edge_.push_back(mid);
    if (top > mid) {
        // geometric in w = 1 - x toward the upper end of the support
        double w_hi = 1.0 - mid;
        double w_lo = top == 1.0 ? kWFloor : 1.0 - top;
        double ratio_hi = std::pow(w_hi / w_lo, 1.0 / double(kCellsPerSide));
        for (std::size_t j = 1; j < kCellsPerSide; ++j)
            edge_.push_back(1.0 - w_hi / std::pow(ratio_hi, double(j)));
        edge_.push_back(1.0 - w_lo);
        if (top == 1.0) {
            top_closure_ = spec.family == ContinuousFamily::beta;
            if (top_closure_)
                edge_.push_back(1.0);
            // non-beta densities on full support: the [1-w_lo, 1] sliver is
            // covered as an ordinary cell (nu is bounded there for uniform;
            // pointwise densities are assumed bounded at 1)
            else
                edge_.back() = 1.0;
        }
    }

    const std::size_t m = edge_.size() - 1;
    sup_mass_.resize(m);
    sup_nu_.resize(m);
    mass_env_.resize(m);
    nu_env_.resize(m);

    auto dens = [&](double x) { return spec.continuous_density(x); };
    const double alpha = spec.beta_alpha;
    for (std::size_t i = 0; i < m; ++i) {
        double lo = edge_[i], hi = edge_[i + 1];
        bool closure = top_closure_ && i == m - 1;
        if (closure) {
            double norm = std::exp(log_beta(2.0 - alpha, alpha));
            double mass = spec.cont_scale * std::pow(kWFloor, alpha) / (alpha * norm);
            mass_env_[i] = mass * 1.0000001;  // absorbs the x^{1-alpha} factor
            nu_env_[i] = mass_env_[i] / ((1.0 - kWFloor) * (1.0 - kWFloor));
            sup_mass_[i] = sup_nu_[i] = 0.0;  // unused for the shape-sampled cell
            continue;
        }
        double eval_hi = std::min(hi, spec.eta);
        switch (spec.family) {
            case ContinuousFamily::uniform:
                sup_mass_[i] = spec.cont_scale;
                sup_nu_[i] = spec.cont_scale / (lo * lo);
                break;
            case ContinuousFamily::beta:
                // density is monotone (direction set by alpha); nu = dens/x^2
                // may peak inside one cell for alpha < 1, 5% headroom covers it
                sup_mass_[i] = alpha >= 1.0 ? dens(lo) : dens(eval_hi);
                sup_nu_[i] = std::max(dens(lo) / (lo * lo), dens(eval_hi) / (eval_hi * eval_hi)) *
                             (alpha < 1.0 ? 1.05 : 1.0);
                break;
            default: {  // pointwise density: sampled sup with headroom
                double dm = std::max({dens(lo), dens(0.5 * (lo + eval_hi)), dens(eval_hi)});
                sup_mass_[i] = 1.3 * dm;
                sup_nu_[i] = 1.3 * dm / (lo * lo);
            }
        }
        double w = hi - lo;
        mass_env_[i] = sup_mass_[i] * w;
        nu_env_[i] = sup_nu_[i] * w;
    }

    mass_pre_.assign(m + 1, 0.0);
    for (std::size_t i = 0; i < m; ++i) mass_pre_[i + 1] = mass_pre_[i] + mass_env_[i];
    nu_suf_.assign(m + 1, 0.0);
    for (std::size_t i = m; i-- > 0;) nu_suf_[i] = nu_suf_[i + 1] + nu_env_[i];

    floor_mass_ = spec.continuous_mass_below(kXFloor);
}

ImpactSampler::Breakdown ImpactSampler::breakdown(long b) const {
    Breakdown bd{};
    const double c2 = c2_of(b);
    const double xb = std::sqrt(2.0 / (double(b) * double(b - 1)));
    for (std::size_t i = 0; i < atom_x_.size(); ++i)
        bd.atoms += atom_m_[i] * std::min(c2, 1.0 / (atom_x_[i] * atom_x_[i]));
    const std::size_t m = mass_env_.size();
    bd.straddle = m;
    if (m == 0) {
        bd.total = bd.atoms;
        return bd;
    }
    if (xb >= edge_.back()) {
        bd.below = c2 * (floor_mass_ + mass_pre_[m]);
    } else {
        auto it = std::upper_bound(edge_.begin(), edge_.end(), xb);
        std::size_t cell = std::size_t(it - edge_.begin()) - 1;  // edge_[cell] <= xb < edge_[cell+1]
        bd.straddle = cell;
        bd.below = c2 * (floor_mass_ + mass_pre_[cell]);
        bd.mid = std::max(c2 * mass_env_[cell], nu_env_[cell]);
        bd.above = nu_suf_[cell + 1];
    }
    bd.total = bd.atoms + bd.below + bd.mid + bd.above;
    return bd;
}

double ImpactSampler::envelope_rate(long b) const { return breakdown(b).total; }

double ImpactSampler::cell_position(std::size_t idx, double u) const {
    if (top_closure_ && idx == mass_env_.size() - 1) {
        double w = kWFloor * std::pow(u, 1.0 / spec_.beta_alpha);
        return 1.0 - w;
    }
    return edge_[idx] + u * (edge_[idx + 1] - edge_[idx]);
}

ImpactSampler::Proposal ImpactSampler::propose(long b, Xoshiro256ss& rng) const {
    const double c2 = c2_of(b);
    Breakdown bd = breakdown(b);
    double u = rng.uniform01() * bd.total;

    auto dens = [&](double x) { return spec_.continuous_density(x); };
    auto clamp1 = [](double a) { return a > 1.0 ? 1.0 : a; };
    const std::size_t m = mass_env_.size();

    if (u < bd.atoms) {
        std::size_t i = 0;
        for (; i + 1 < atom_x_.size(); ++i) {
            double w = atom_m_[i] * std::min(c2, 1.0 / (atom_x_[i] * atom_x_[i]));
            if (u < w) break;
            u -= w;
        }
        double x = atom_x_[i];
        double env = std::min(c2 * x * x, 1.0);
        return {x, clamp1(prob_two_or_more(double(b), x) / env)};
    }
    u -= bd.atoms;

    if (u < bd.below) {
        double floor_w = c2 * floor_mass_;
        if (u < floor_w && floor_mass_ > 0.0) {
            double v = rng.uniform_open();
            double x = spec_.family == ContinuousFamily::beta
                           ? kXFloor * std::pow(v, 1.0 / (2.0 - spec_.beta_alpha))
                           : kXFloor * v;
            return {x, clamp1(prob_two_or_more(double(b), x) / (c2 * x * x))};
        }
        double target = (u - floor_w) / c2;
        std::size_t idx =
            std::size_t(std::upper_bound(mass_pre_.begin(), mass_pre_.end(), target) -
                        mass_pre_.begin()) -
            1;
        if (idx >= m) idx = m - 1;
        double x = cell_position(idx, rng.uniform_open());
        double a = prob_two_or_more(double(b), x) / (c2 * x * x);
        // closure cell proposals already follow the (1-x)^{alpha-1} shape
        double shape = (top_closure_ && idx == m - 1) ? std::pow(x, 1.0 - spec_.beta_alpha)
                                                      : dens(x) / sup_mass_[idx];
        return {x, clamp1(a * clamp1(shape))};
    }
    u -= bd.below;

    if (bd.straddle < m && u < bd.mid) {
        std::size_t idx = bd.straddle;
        double x = cell_position(idx, rng.uniform_open());
        double env_density = bd.mid / (edge_[idx + 1] - edge_[idx]);
        double target = prob_two_or_more(double(b), x) * dens(x) / (x * x);
        return {x, clamp1(target / env_density)};
    }
    if (bd.straddle < m) u -= bd.mid;

    // nu piece: cells above the straddle; pick the cell whose cumulative
    // envelope mass (walking up from `first`) covers the residual u
    std::size_t first = bd.straddle < m ? bd.straddle + 1 : m - 1;
    double target = nu_suf_[first] - u;
    std::size_t idx = first;
    {
        std::size_t a = first, bnd = m;
        while (a + 1 < bnd) {
            std::size_t mid2 = (a + bnd) / 2;
            if (nu_suf_[mid2] > target)
                a = mid2;
            else
                bnd = mid2;
        }
        idx = a;
    }
    double x = cell_position(idx, rng.uniform_open());
    double a2 = prob_two_or_more(double(b), x);
    if (top_closure_ && idx == m - 1) {
        double r = (1.0 - kWFloor) * (1.0 - kWFloor) / (x * x) * std::pow(x, 1.0 - spec_.beta_alpha);
        return {x, clamp1(a2 * clamp1(r))};
    }
    double nu_x = dens(x) / (x * x);
    return {x, clamp1(a2 * nu_x / sup_nu_[idx])};
}

// ---- simulate_path -------------------------------------------------------

BlockCountPath simulate_path(const LambdaSpec& spec, long n, double horizon, std::uint64_t seed,
                             const SimulateOptions& options) {
    if (n < 2) throw DomainError("simulate_path requires n >= 2");
    if (n > kMaxSupportedN) throw DomainError("initial block count beyond the supported range");
    if (!(horizon > 0.0)) throw DomainError("horizon must be positive (or infinite)");
    if (spec.atom_one > 0.0)
        throw UnsupportedMeasureError("simulation does not support an atom at 1");
    if (!(spec.total_mass > 0.0)) throw InvalidMeasureError("zero-mass measure");

    bool atoms_present = false;
    for (auto& [x, m] : spec.atoms) atoms_present |= x <= spec.eta;
    const bool continuous_available = spec.has_continuous_density() || atoms_present;
    const bool pure_kingman = !continuous_available;

    SimBackend backend = options.backend;
    if (backend == SimBackend::x_binomial && !continuous_available)
        backend = SimBackend::direct_k;  // documented fallback
    if (backend == SimBackend::auto_select)
        backend = (pure_kingman || n <= options.direct_k_auto_limit) ? SimBackend::direct_k
                                                                     : SimBackend::x_binomial;
    if (backend == SimBackend::direct_k && !pure_kingman && n > 4096)
        throw DomainError("direct_k rows at this scale would be prohibitive; use x_binomial");

    BlockCountPath path;
    path.initial_n = n;
    path.seed = seed;
    path.measure_id = content_hash(spec);
    path.backend = backend;
    path.horizon = horizon;
    path.events.reserve(std::min<long>(n, 1 << 20));

    Xoshiro256ss rng(seed);
    double t = 0.0;
    long b = n;

    if (backend == SimBackend::direct_k) {
        if (pure_kingman) {
            const double c = spec.atom_zero;
            while (b > 1) {
                t += rng.exponential(c * c2_of(b));
                if (t >= horizon) break;
                --b;
                path.events.emplace_back(t, b);
            }
        } else {
            RateRowCache local_cache(spec);
            RateRowCache* cache = options.row_cache ? options.row_cache : &local_cache;
            while (b > 1) {
                const RateRow& row = cache->row(b);
                t += rng.exponential(row.total_rate);
                if (t >= horizon) break;
                long k = row.sample_merger_size(rng.uniform01());
                b -= k - 1;
                path.events.emplace_back(t, b);
            }
        }
    } else {
        ImpactSampler local_sampler(spec);
        const ImpactSampler& sampler = options.sampler ? *options.sampler : local_sampler;
        const double c = spec.atom_zero;
        long consecutive_rejections = 0;
        while (b > 1) {
            double kingman_rate = c * c2_of(b);
            double env = sampler.envelope_rate(b);
            double total = kingman_rate + env;
            t += rng.exponential(total);
            if (t >= horizon) break;
            if (rng.uniform01() * total < kingman_rate) {
                --b;
                path.events.emplace_back(t, b);
                consecutive_rejections = 0;
                continue;
            }
            ImpactSampler::Proposal prop = sampler.propose(b, rng);
            if (rng.uniform01() >= prop.accept) {
                if (++consecutive_rejections > 10000000)
                    throw SamplingError(
                        "x_binomial thinning rejected 1e7 consecutive candidates at state " +
                        std::to_string(b));
                continue;
            }
            consecutive_rejections = 0;
            long k = binomial_draw_ge2(rng, b, prop.x);
            b -= k - 1;
            path.events.emplace_back(t, b);
        }
    }

    path.absorbed = (b == 1);
    return path;
}

// ---- path functionals ----------------------------------------------------

double tree_length(const BlockCountPath& path, double a, double b) {
    if (!(a >= 0.0) || !(b >= a)) throw DomainError("tree_length requires 0 <= a <= b");
    if (a == b) return 0.0;
    if (!path.absorbed && b > path.horizon * (1.0 + 1e-12))
        throw ContractError("path neither covers [a, b] nor absorbed before b");

    CompensatedSum acc;
    double piece_start = 0.0;
    long count = path.initial_n;
    for (auto& [tt, cc] : path.events) {
        double lo = std::max(a, piece_start), hi = std::min(b, tt);
        if (hi > lo) acc.add(double(count) * (hi - lo));
        piece_start = tt;
        count = cc;
        if (piece_start >= b) break;
    }
    double lo = std::max(a, piece_start);
    if (b > lo) acc.add(double(count) * (b - lo));
    return acc.value();
}

std::optional<double> hitting_time(const BlockCountPath& path, long n0) {
    if (n0 < 1) throw DomainError("hitting_time requires n0 >= 1");
    if (path.initial_n <= n0) return 0.0;
    // counts decrease along events: first event with count <= n0
    auto it = std::partition_point(path.events.begin(), path.events.end(),
                                   [n0](const std::pair<double, long>& e) { return e.second > n0; });
    if (it != path.events.end()) return it->first;
    return std::nullopt;
}

std::string path_to_csv(const BlockCountPath& path) {
    std::ostringstream os;
    char buf[64];
    os << "# cdi-lab path schema 1; initial_n=" << path.initial_n << "; seed=" << path.seed
       << "; measure_id=" << std::hex << path.measure_id << std::dec << "; backend="
       << (path.backend == SimBackend::direct_k ? "direct_k" : "x_binomial") << "\n";
    os << "time,count\n";
    std::snprintf(buf, sizeof buf, "%.17g", 0.0);
    os << buf << "," << path.initial_n << "\n";
    for (auto& [t, c] : path.events) {
        std::snprintf(buf, sizeof buf, "%.17g", t);
        os << buf << "," << c << "\n";
    }
    return os.str();
}

}  // namespace cdi

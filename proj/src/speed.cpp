#include "cdi/speed.hpp"

#include <algorithm>
#include <cmath>

#include "cdi/errors.hpp"
#include "cdi/quadrature.hpp"
#include "cdi/special.hpp"

namespace cdi {

namespace {

constexpr double kZeroCut = 1e-16;   // analytic closure width at x = 0
constexpr double kOneCutBeta = 1e-16;
constexpr double kOneCutGeneric = 1e-12;

// ---- monotone cubic (Fritsch-Carlson) interpolation --------------------

std::vector<double> pchip_slopes(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    std::vector<double> m(n, 0.0);
    if (n < 2) return m;
    std::vector<double> h(n - 1), d(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = x[i + 1] - x[i];
        d[i] = (y[i + 1] - y[i]) / h[i];
    }
    if (n == 2) {
        m[0] = m[1] = d[0];
        return m;
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (d[i - 1] == 0.0 || d[i] == 0.0 || (d[i - 1] > 0) != (d[i] > 0)) {
            m[i] = 0.0;
        } else {
            double w1 = 2.0 * h[i] + h[i - 1];
            double w2 = h[i] + 2.0 * h[i - 1];
            m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
        }
    }
    auto end_slope = [](double h0, double h1, double d0, double d1) {
        double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (s * d0 <= 0.0) return 0.0;
        if ((d0 > 0) != (d1 > 0) && std::abs(s) > 3.0 * std::abs(d0)) return 3.0 * d0;
        return s;
    };
    m[0] = end_slope(h[0], h[1], d[0], d[1]);
    m[n - 1] = end_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
    return m;
}

double hermite_eval(const std::vector<double>& x, const std::vector<double>& y,
                    const std::vector<double>& m, double xq) {
    auto it = std::upper_bound(x.begin(), x.end(), xq);
    std::size_t i = it == x.begin() ? 0 : std::size_t(it - x.begin()) - 1;
    if (i + 1 >= x.size()) i = x.size() - 2;
    double h = x[i + 1] - x[i];
    double t = (xq - x[i]) / h;
    double t2 = t * t, t3 = t2 * t;
    double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
    double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
    return h00 * y[i] + h10 * h * m[i] + h01 * y[i + 1] + h11 * h * m[i + 1];
}

}  // namespace

// ---- NuKernelTable ------------------------------------------------------

double NuKernelTable::closure_zero(const KernelSeries& s) const {
    switch (zero_kind_) {
        case ZeroClosure::none:
            return 0.0;
        case ZeroClosure::power: {
            double a = zero_alpha_;
            return zero_coef_ * (s.a2 * std::pow(zero_cut_, 2.0 - a) / (2.0 - a) +
                                 s.a3 * std::pow(zero_cut_, 3.0 - a) / (3.0 - a) +
                                 s.a4 * std::pow(zero_cut_, 4.0 - a) / (4.0 - a));
        }
        case ZeroClosure::flat:
            return zero_coef_ * (s.a2 * zero_cut_ + s.a3 * zero_cut_ * zero_cut_ / 2.0 +
                                 s.a4 * zero_cut_ * zero_cut_ * zero_cut_ / 3.0);
    }
    return 0.0;
}

NuKernelTable NuKernelTable::build(const LambdaSpec& spec) {
    NuKernelTable t;
    t.atom_zero_ = spec.atom_zero;
    t.atom_one_ = spec.atom_one;
    for (auto& [x, m] : spec.atoms) {
        if (x <= spec.eta) {
            t.atom_x_.push_back(x);
            t.atom_wnu_.push_back(m / (x * x));
        }
    }
    if (!spec.has_continuous_density()) return t;

    auto add_panel = [&](double lo, double hi) {
        // four GK15 sub-panels per octave keep the per-panel error near
        // machine precision even across the knee of b-dependent kernels up to
        // b ~ 1e6 (the total-rate identity is checked at 1e-8 relative)
        auto emit = [&](double a, double b) {
            for_each_gk15_node(a, b, [&](double x, double w) {
                t.node_x_.push_back(x);
                t.node_wnu_.push_back(w * spec.continuous_density(x) / (x * x));
            });
        };
        double q1 = 0.75 * lo + 0.25 * hi, q2 = 0.5 * (lo + hi), q3 = 0.25 * lo + 0.75 * hi;
        emit(lo, q1);
        emit(q1, q2);
        emit(q2, q3);
        emit(q3, hi);
    };

    // region near 1 (only reached when the support extends to 1)
    double main_top = spec.eta;
    if (spec.eta == 1.0) {
        main_top = 0.5;
        double w_cut =
            spec.family == ContinuousFamily::beta ? kOneCutBeta : kOneCutGeneric;
        double hi = 0.5;
        while (hi > w_cut) {
            double lo = std::max(0.5 * hi, w_cut);
            if (!(lo < hi)) break;
            add_panel(1.0 - hi, 1.0 - lo);
            hi = lo;
        }
        if (spec.family == ContinuousFamily::beta) {
            double alpha = spec.beta_alpha;
            double norm = std::exp(log_beta(2.0 - alpha, alpha));
            double mass = spec.cont_scale * std::pow(w_cut, alpha) / (alpha * norm);
            double xc = 1.0 - w_cut * alpha / (alpha + 1.0);
            t.right_closure_x_ = xc;
            t.right_closure_wnu_ = mass / (xc * xc);
        } else {
            add_panel(1.0 - w_cut, 1.0);  // interior nodes only; integrand regular here
        }
    }

    // main region: geometric octave panels down to the zero cut, ending flush
    // against the analytic closure (a gap here silently loses the near-zero
    // mass of large-b kernels)
    double hi = main_top;
    while (hi > kZeroCut) {
        double lo = std::max(0.5 * hi, kZeroCut);
        if (!(lo < hi)) break;
        add_panel(lo, hi);
        hi = lo;
    }

    t.zero_cut_ = kZeroCut;
    if (spec.family == ContinuousFamily::beta) {
        t.zero_kind_ = ZeroClosure::power;
        t.zero_alpha_ = spec.beta_alpha;
        t.zero_coef_ =
            spec.cont_scale / std::exp(log_beta(2.0 - spec.beta_alpha, spec.beta_alpha));
    } else {
        t.zero_kind_ = ZeroClosure::flat;
        t.zero_coef_ = spec.family == ContinuousFamily::uniform
                           ? spec.cont_scale
                           : spec.continuous_density(0.5 * kZeroCut);
    }
    return t;
}

// ---- PsiEvaluator --------------------------------------------------------

PsiEvaluator::PsiEvaluator(const LambdaSpec& spec, double tol)
    : measure_(spec), table_(NuKernelTable::build(spec)), tol_(tol) {
    if (spec.atom_one > 0.0)
        throw UnsupportedMeasureError(
            "psi is only defined for measures with no atom at 1");
    if (!(spec.total_mass > 0.0)) throw InvalidMeasureError("psi of a zero-mass measure");
}

double PsiEvaluator::psi(double q) const {
    if (q < 0.0) throw DomainError("psi requires q >= 0");
    if (q == 0.0) return 0.0;
    KernelSeries s{q * q / 2.0, -q * q * q / 6.0, q * q * q * q / 24.0};
    return table_.integrate([q](double x) { return exp_remainder(q * x); }, s);
}

double PsiEvaluator::local_exponent(double q) const {
    const double f = std::pow(10.0, 1.0 / 16.0);
    return (std::log(psi(q * f)) - std::log(psi(q / f))) / (2.0 * std::log(f));
}

// ---- u integrals and the speed table ------------------------------------

namespace {

struct SegmentedU {
    std::vector<double> values;  // per-segment integrals of 1/psi
    double err_total = 0.0;
};

SegmentedU inverse_psi_segments(const PsiEvaluator& psi, const std::vector<double>& log_q) {
    SegmentedU out;
    out.values.resize(log_q.size() - 1);
    auto integrand = [&psi](double s) {
        double q = std::exp(s);
        return q / psi.psi(q);
    };
    for (std::size_t j = 0; j + 1 < log_q.size(); ++j) {
        auto r = gauss_kronrod_15(integrand, log_q[j], log_q[j + 1]);
        out.values[j] = r.value;
        out.err_total += r.error;
    }
    return out;
}

}  // namespace

double integrate_inverse_psi(const PsiEvaluator& psi, double q_lo, double q_hi,
                             int points_per_decade) {
    if (!(q_lo > 0.0) || !(q_hi > q_lo)) throw DomainError("bad inverse-psi integration range");
    int n = std::max<int>(1, int(std::ceil(points_per_decade * std::log10(q_hi / q_lo))));
    std::vector<double> lq(n + 1);
    double step = (std::log(q_hi) - std::log(q_lo)) / n;
    for (int j = 0; j <= n; ++j) lq[j] = std::log(q_lo) + step * j;
    auto seg = inverse_psi_segments(psi, lq);
    CompensatedSum s;
    for (double v : seg.values) s.add(v);
    return s.value();
}

SpeedTable build_speed_table(const PsiEvaluator& psi, double q_min, double q_max,
                             int points_per_decade) {
    if (!(q_min >= 1.0)) throw DomainError("speed table requires q_min >= 1");
    if (!(q_max >= 10.0 * q_min)) throw DomainError("speed table requires q_max >= 10 q_min");
    if (points_per_decade < 4) throw DomainError("points_per_decade too small");

    SpeedTable t;
    t.q_min_ = q_min;
    t.q_max_ = q_max;
    t.points_per_decade_ = points_per_decade;
    t.measure_id_ = content_hash(psi.measure());

    int n = std::max<int>(2, int(std::ceil(points_per_decade * std::log10(q_max / q_min))));
    t.log_q_.resize(n + 1);
    double step = (std::log(q_max) - std::log(q_min)) / n;
    for (int j = 0; j <= n; ++j) t.log_q_[j] = std::log(q_min) + step * j;

    // Local power exponent at the top; the tail model is
    // psi(q) ~ psi(q_max) (q/q_max)^theta for q > q_max.
    double theta = psi.local_exponent(q_max);
    double theta_prev = psi.local_exponent(q_max / 10.0);
    if (!(theta > 1.05))
        throw TailNotResolvedError(
            "local exponent of psi at q_max is <= 1.05; the tail of u cannot be closed, "
            "increase q_max (or the measure does not come down from infinity)");
    double psi_top = psi.psi(q_max);
    double tail = q_max / ((theta - 1.0) * psi_top);
    double tail_err = tail * std::max(std::abs(theta - theta_prev), 1e-6) / (theta - 1.0);

    auto seg = inverse_psi_segments(psi, t.log_q_);

    std::vector<double> u(n + 1);
    CompensatedSum acc;
    acc.add(tail);
    u[n] = acc.value();
    for (int j = n - 1; j >= 0; --j) {
        acc.add(seg.values[j]);
        u[j] = acc.value();
    }
    t.tail_u_ = u[n];
    t.u_max_ = u[0];
    t.claimed_tol_ = seg.err_total + tail_err;
    t.tail_theta_ = theta;

    for (int j = 0; j < n; ++j)
        if (!(u[j] > u[j + 1]))
            throw NumericalInconsistencyError("u is not strictly decreasing on the grid");

    // Unit-mass lower bound u(q) >= 2/q.
    if (std::abs(psi.measure().total_mass - 1.0) <= 1e-12) {
        for (int j = 0; j <= n; ++j)
            if (u[j] < 2.0 / std::exp(t.log_q_[j]) * (1.0 - 1e-9))
                throw NumericalInconsistencyError("u violates the unit-mass bound u(q) >= 2/q");
    }

    t.log_u_.resize(n + 1);
    for (int j = 0; j <= n; ++j) t.log_u_[j] = std::log(u[j]);
    t.slope_u_ = pchip_slopes(t.log_q_, t.log_u_);

    t.inv_x_.assign(t.log_u_.rbegin(), t.log_u_.rend());
    t.inv_y_.assign(t.log_q_.rbegin(), t.log_q_.rend());
    t.inv_slope_ = pchip_slopes(t.inv_x_, t.inv_y_);
    return t;
}

double SpeedTable::u(double q) const {
    if (!(q > 0.0)) throw DomainError("u requires q > 0");
    if (q < q_min_) throw RangeError("u(q) below the tabulated block-count range");
    if (q >= q_max_) return tail_u_ * std::pow(q / q_max_, 1.0 - tail_theta_);
    return std::exp(hermite_eval(log_q_, log_u_, slope_u_, std::log(q)));
}

double SpeedTable::v(double t, bool allow_extrapolation) const {
    if (!(t > 0.0)) throw DomainError("v requires t > 0 (v(0+) is infinite)");
    if (t < tail_u_) {
        if (!allow_extrapolation)
            throw RangeError("v(t) above the tabulated range; extend q_max or allow "
                             "tail extrapolation");
        return q_max_ * std::pow(t / tail_u_, 1.0 / (1.0 - tail_theta_));
    }
    if (t > u_max_)
        throw RangeError("v(t) below the tabulated block-count range (t too large)");
    return std::exp(hermite_eval(inv_x_, inv_y_, inv_slope_, std::log(t)));
}

std::vector<double> truncation_speed_ratio(const LambdaSpec& spec, double eta,
                                           const std::vector<double>& t_grid) {
    if (!(eta > 0.0) || !(eta < 1.0))
        throw DomainError("truncation_speed_ratio requires eta in (0,1)");
    LambdaSpec cut = truncate(spec, eta);
    PsiEvaluator psi_full(spec), psi_cut(cut);
    SpeedTable full = build_speed_table(psi_full);
    SpeedTable part = build_speed_table(psi_cut);
    std::vector<double> out;
    out.reserve(t_grid.size());
    for (double t : t_grid) out.push_back(full.v(t) / part.v(t));
    return out;
}

}  // namespace cdi

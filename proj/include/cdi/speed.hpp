#pragma once

#include <cstdint>
#include <vector>

#include "cdi/measure.hpp"

namespace cdi {

/// Leading series coefficients of a merger kernel near x = 0:
/// kernel(x) ~ a2 x^2 + a3 x^3 + a4 x^4. a2 is also the x->0 limit of
/// kernel(x)/x^2 used for the atom at zero.
struct KernelSeries {
    double a2 = 0.0;
    double a3 = 0.0;
    double a4 = 0.0;
};

/// Precomputed quadrature backbone for integrals of a kernel against
/// nu(dx) = x^{-2} Lambda(dx). The node layout depends only on the measure, so
/// one table serves psi, gamma_b and total-rate kernels at every scale.
/// Immutable after build; cheap to evaluate (one kernel call per node).
class NuKernelTable {
  public:
    static NuKernelTable build(const LambdaSpec& spec);

    /// integral of kernel against nu over (0,1] plus atom_zero * series.a2.
    template <class F>
    double integrate(F&& kernel, const KernelSeries& series) const {
        double acc = atom_zero_ * series.a2;
        if (atom_one_ > 0.0) acc += atom_one_ * kernel(1.0);
        for (std::size_t i = 0; i < atom_x_.size(); ++i)
            acc += atom_wnu_[i] * kernel(atom_x_[i]);
        double s = 0.0;
        for (std::size_t i = 0; i < node_x_.size(); ++i) s += node_wnu_[i] * kernel(node_x_[i]);
        acc += s;
        acc += closure_zero(series);
        if (right_closure_wnu_ > 0.0) acc += right_closure_wnu_ * kernel(right_closure_x_);
        return acc;
    }

    double atom_zero_mass() const { return atom_zero_; }
    std::size_t node_count() const { return node_x_.size(); }

  private:
    double closure_zero(const KernelSeries& s) const;

    double atom_zero_ = 0.0;
    double atom_one_ = 0.0;
    std::vector<double> atom_x_, atom_wnu_;  // interior atoms: position, mass/x^2
    std::vector<double> node_x_, node_wnu_;  // quadrature nodes, weight * nu-density
    // analytic closure of [0, w0]
    enum class ZeroClosure { none, power, flat } zero_kind_ = ZeroClosure::none;
    double zero_cut_ = 0.0;    // w0
    double zero_coef_ = 0.0;   // power: scale/B; flat: nu-density * x^2 near 0
    double zero_alpha_ = 0.0;  // power exponent (beta family alpha)
    // analytic closure of [1-w1, 1] for the beta family on full support
    double right_closure_x_ = 0.0, right_closure_wnu_ = 0.0;
};

/// Branching-mechanism style functional
///   psi(q) = atom_zero q^2/2 + integral of (e^{-qx} - 1 + qx) x^{-2} Lambda(dx).
/// Strictly increasing and convex, psi(0) = 0.
class PsiEvaluator {
  public:
    explicit PsiEvaluator(const LambdaSpec& spec, double tol = 1e-10);

    double psi(double q) const;
    double operator()(double q) const { return psi(q); }

    /// d log psi / d log q by a centered difference one eighth of a decade wide.
    double local_exponent(double q) const;

    const LambdaSpec& measure() const { return measure_; }
    double tolerance() const { return tol_; }
    const NuKernelTable& table() const { return table_; }

  private:
    LambdaSpec measure_;
    NuKernelTable table_;
    double tol_;
};

/// integral of 1/psi over [q_lo, q_hi], by Gauss-Kronrod panels on a geometric
/// grid (points_per_decade panels per decade).
double integrate_inverse_psi(const PsiEvaluator& psi, double q_lo, double q_hi,
                             int points_per_decade = 32);

/// Tabulated u(q) = integral_q^inf ds/psi(s) on a geometric grid with a power
/// tail model above q_max, and its monotone inverse v(t). Immutable.
class SpeedTable {
  public:
    double u(double q) const;
    double v(double t, bool allow_extrapolation = false) const;

    double q_min() const { return q_min_; }
    double q_max() const { return q_max_; }
    double u_at_qmax() const { return tail_u_; }    // smallest tabulated time
    double u_at_qmin() const { return u_max_; }     // largest tabulated time
    double tail_exponent() const { return tail_theta_; }
    double claimed_tol() const { return claimed_tol_; }
    int points_per_decade() const { return points_per_decade_; }
    std::uint64_t measure_id() const { return measure_id_; }

    friend SpeedTable build_speed_table(const PsiEvaluator& psi, double q_min, double q_max,
                                        int points_per_decade);

  private:
    SpeedTable() = default;
    std::vector<double> log_q_, log_u_;       // log_q increasing, log_u decreasing
    std::vector<double> slope_u_;             // pchip slopes of log_u over log_q
    std::vector<double> inv_x_, inv_y_, inv_slope_;  // log_u (incr) -> log_q
    double q_min_ = 0, q_max_ = 0, tail_u_ = 0, tail_theta_ = 0, u_max_ = 0;
    double claimed_tol_ = 0;
    int points_per_decade_ = 0;
    std::uint64_t measure_id_ = 0;
};

SpeedTable build_speed_table(const PsiEvaluator& psi, double q_min = 1.0, double q_max = 1e10,
                             int points_per_decade = 64);

/// v(t) / v_eta(t) on the given time grid, from two independently built
/// speed tables (the truncated measure keeps the same support below eta).
/// Each ratio lies in (0, 1] and increases toward 1 as t -> 0.
std::vector<double> truncation_speed_ratio(const LambdaSpec& spec, double eta,
                                           const std::vector<double>& t_grid);

}  // namespace cdi

#include "cdi/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "cdi/errors.hpp"
#include "cdi/special.hpp"

namespace cdi {

namespace {

// Kronrod-15 abscissae on [0,1] (symmetric) and weights; Gauss-7 weights sit
// on the odd Kronrod nodes.
const double kronrod_x[8] = {0.991455371120813, 0.949107912342759, 0.864864423359769,
                             0.741531185599394, 0.586087235467691, 0.405845151377397,
                             0.207784955007898, 0.000000000000000};
const double kronrod_w[8] = {0.022935322010529, 0.063092092629979, 0.104790010322250,
                             0.140653259715525, 0.169004726639267, 0.190350578064785,
                             0.204432940075298, 0.209482141084728};
const double gauss_w[4] = {0.129484966168870, 0.279705391489277, 0.381830050505119,
                           0.417959183673469};

struct Segment {
    double a, b;
    double value;
    double error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

Segment evaluate_segment(const std::function<double(double)>& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);

    double fv[15];
    double f_center = f(center);
    fv[14] = f_center;
    for (int i = 0; i < 7; ++i) {
        double dx = half * kronrod_x[i];
        fv[2 * i] = f(center - dx);
        fv[2 * i + 1] = f(center + dx);
    }

    double result_kronrod = f_center * kronrod_w[7];
    double result_gauss = f_center * gauss_w[3];
    for (int i = 0; i < 7; ++i) {
        double pair = fv[2 * i] + fv[2 * i + 1];
        result_kronrod += kronrod_w[i] * pair;
        if (i % 2 == 1) result_gauss += gauss_w[i / 2] * pair;
    }

    // QUADPACK-style error estimate based on deviation from the mean.
    double mean = result_kronrod * 0.5;
    double resasc = kronrod_w[7] * std::abs(f_center - mean);
    for (int i = 0; i < 7; ++i)
        resasc += kronrod_w[i] * (std::abs(fv[2 * i] - mean) + std::abs(fv[2 * i + 1] - mean));
    resasc *= half;

    double raw = std::abs(result_kronrod - result_gauss) * half;
    double err = raw;
    if (resasc != 0.0 && raw != 0.0)
        err = resasc * std::min(1.0, std::pow(200.0 * raw / resasc, 1.5));

    return {a, b, result_kronrod * half, err};
}

QuadResult refine(const std::function<double(double)>& f, std::vector<Segment> segments,
                  const QuadOptions& opt, double extra_value, double extra_error,
                  std::size_t evals_so_far) {
    std::priority_queue<Segment> heap(segments.begin(), segments.end());
    std::size_t evals = evals_so_far;
    std::size_t count = segments.size();

    auto totals = [&heap, extra_value, extra_error]() {
        // Recompute exactly from the heap contents.
        CompensatedSum v, e;
        std::priority_queue<Segment> copy = heap;
        while (!copy.empty()) {
            v.add(copy.top().value);
            e.add(copy.top().error);
            copy.pop();
        }
        return std::pair<double, double>(v.value() + extra_value, e.value() + extra_error);
    };

    // Cheap running totals; re-synced exactly at the end.
    double total_v = extra_value, total_e = extra_error;
    {
        std::priority_queue<Segment> copy = heap;
        while (!copy.empty()) {
            total_v += copy.top().value;
            total_e += copy.top().error;
            copy.pop();
        }
    }

    while (total_e > std::max(opt.abs_tol, opt.rel_tol * std::abs(total_v)) &&
           count < opt.max_segments && !heap.empty()) {
        Segment worst = heap.top();
        if (worst.error <= 0.0) break;
        heap.pop();
        double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {
            // Interval at floating-point resolution; cannot split further.
            worst.error = 0.0;
            heap.push(worst);
            continue;
        }
        Segment left = evaluate_segment(f, worst.a, mid);
        Segment right = evaluate_segment(f, mid, worst.b);
        evals += 30;
        total_v += left.value + right.value - worst.value;
        total_e += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++count;
    }

    auto [v, e] = totals();
    if (e > std::max(opt.abs_tol, opt.rel_tol * std::abs(v)))
        throw QuadratureError("quadrature tolerance not reached", v, e);
    return {v, e, evals};
}

}  // namespace

QuadResult gauss_kronrod_15(const std::function<double(double)>& f, double a, double b) {
    Segment s = evaluate_segment(f, a, b);
    return {s.value, s.error, 15};
}

void for_each_gk15_node(double a, double b, const std::function<void(double, double)>& fn) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    fn(center, half * kronrod_w[7]);
    for (int i = 0; i < 7; ++i) {
        double dx = half * kronrod_x[i];
        double w = half * kronrod_w[i];
        fn(center - dx, w);
        fn(center + dx, w);
    }
}

QuadResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                              const QuadOptions& opt) {
    if (!(a < b)) return {0.0, 0.0, 0};
    std::vector<Segment> init{evaluate_segment(f, a, b)};
    return refine(f, std::move(init), opt, 0.0, 0.0, 15);
}

QuadResult integrate_endpoint_graded(const std::function<double(double)>& f, double a, double b,
                                     const QuadOptions& opt) {
    if (!(a < b)) return {0.0, 0.0, 0};

    const double width = b - a;
    std::vector<Segment> segments;
    std::size_t evals = 0;
    double tail_value = 0.0, tail_error = 0.0;

    // Descend geometrically from the midpoint toward the given endpoint.
    // `place(offset)` maps an offset in (0, width/2] to the coordinate.
    auto descend = [&](auto place) {
        double hi = 0.5 * width;
        double last[3] = {0.0, 0.0, 0.0};
        int have = 0;
        for (int j = 0; j < 1200; ++j) {
            double lo = 0.5 * hi;
            double x_lo = place(lo), x_hi = place(hi);
            double left = std::min(x_lo, x_hi), right = std::max(x_lo, x_hi);
            if (!(left < right)) break;  // endpoint resolution reached
            Segment s = evaluate_segment(f, left, right);
            evals += 15;
            segments.push_back(s);

            last[j % 3] = std::abs(s.value);
            if (have < 3) ++have;
            if (have == 3) {
                double newest = last[j % 3], prev = last[(j + 2) % 3], prev2 = last[(j + 1) % 3];
                bool decreasing = newest <= prev && prev <= prev2;
                if (decreasing && prev2 > 0.0) {
                    double r = std::max(newest / std::max(prev, 1e-300),
                                        prev / std::max(prev2, 1e-300));
                    if (r < 0.9) {
                        double tail = newest * r / (1.0 - r);
                        if (tail < 0.25 * opt.abs_tol) {
                            tail_value += tail;
                            tail_error += 0.5 * tail + 0.25 * opt.abs_tol;
                            return;
                        }
                    }
                }
                if (newest == 0.0 && prev == 0.0 && prev2 == 0.0) return;
            }
            hi = lo;
        }
        // Ran to floating-point resolution: close with one interior-node panel.
        double x_lo = place(std::numeric_limits<double>::min()), x_hi = place(hi);
        double left = std::min(x_lo, x_hi), right = std::max(x_lo, x_hi);
        if (left < right) {
            Segment s = evaluate_segment(f, left, right);
            evals += 15;
            segments.push_back(s);
        }
    };

    descend([&](double off) { return a + off; });
    descend([&](double off) { return b - off; });

    // The two descents cover (a, mid] and [mid, b) exactly once each.
    return refine(f, std::move(segments), opt, tail_value, tail_error, evals);
}

}  // namespace cdi

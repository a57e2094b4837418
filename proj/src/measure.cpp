#include "cdi/measure.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cdi/errors.hpp"
#include "cdi/expr.hpp"
#include "cdi/quadrature.hpp"
#include "cdi/special.hpp"

namespace cdi {

namespace {

constexpr double kEdgeCutoff = 1e-16;  // analytic closure width for beta endpoints

double beta_norm(double alpha) { return std::exp(log_beta(2.0 - alpha, alpha)); }

void validate_common(const LambdaSpec& s) {
    if (s.atom_zero < 0.0 || s.atom_one < 0.0)
        throw InvalidMeasureError("atom masses must be nonnegative");
    if (!(s.eta > 0.0) || s.eta > 1.0) throw DomainError("eta must lie in (0,1]");
    if (s.eta < 1.0 && s.atom_one > 0.0)
        throw InvalidMeasureError("atom at 1 incompatible with truncation eta < 1");
    if (!(s.total_mass > 0.0) || !std::isfinite(s.total_mass))
        throw InvalidMeasureError("total mass must be positive and finite");
}

double continuous_total_mass(const LambdaSpec& s) {
    switch (s.family) {
        case ContinuousFamily::none:
            return 0.0;
        case ContinuousFamily::uniform:
            return s.cont_scale * s.eta;
        case ContinuousFamily::beta:
            return s.cont_scale * incomplete_beta(2.0 - s.beta_alpha, s.beta_alpha, s.eta);
        case ContinuousFamily::interior_atoms: {
            double m = 0.0;
            for (auto& [x, w] : s.atoms)
                if (x <= s.eta) m += w;
            return m;
        }
        case ContinuousFamily::density_fn: {
            QuadOptions opt;
            opt.abs_tol = 1e-12;
            auto f = [&s](double x) { return s.continuous_density(x); };
            return integrate_endpoint_graded(f, 0.0, s.eta, opt).value;
        }
    }
    return 0.0;
}

/// integral of h(x) * continuous density over (0, eta]. h must be bounded
/// near any singular endpoint of the density.
double integrate_continuous(const LambdaSpec& spec, const std::function<double(double)>& h,
                            double tol) {
    QuadOptions opt;
    opt.abs_tol = 0.5 * tol;
    switch (spec.family) {
        case ContinuousFamily::none:
        case ContinuousFamily::interior_atoms:
            return 0.0;
        case ContinuousFamily::uniform: {
            auto f = [&](double x) { return h(x) * spec.cont_scale; };
            return integrate_endpoint_graded(f, 0.0, spec.eta, opt).value;
        }
        case ContinuousFamily::density_fn: {
            auto f = [&](double x) { return h(x) * spec.continuous_density(x); };
            return integrate_endpoint_graded(f, 0.0, spec.eta, opt).value;
        }
        case ContinuousFamily::beta: {
            const double alpha = spec.beta_alpha;
            const double norm = beta_norm(alpha);
            // Analytic closure of [0, w0]: density ~ x^{1-alpha}/B there, so the
            // panel mass is known in closed form and h is sampled at the
            // centroid. Same mirrored at 1 when the support reaches it.
            const double w0 = kEdgeCutoff;
            double mass0 = spec.cont_scale * std::pow(w0, 2.0 - alpha) / ((2.0 - alpha) * norm);
            double left = mass0 * h(w0 * (2.0 - alpha) / (3.0 - alpha));
            double right = 0.0;
            double hi = spec.eta;
            if (spec.eta == 1.0) {
                const double w1 = kEdgeCutoff;
                double mass1 = spec.cont_scale * std::pow(w1, alpha) / (alpha * norm);
                right = mass1 * h(1.0 - w1 * alpha / (alpha + 1.0));
                hi = 1.0 - w1;
            }
            auto f = [&](double x) { return h(x) * spec.continuous_density(x); };
            return left + right + integrate_endpoint_graded(f, w0, hi, opt).value;
        }
    }
    return 0.0;
}

}  // namespace

double LambdaSpec::continuous_density(double x) const {
    switch (family) {
        case ContinuousFamily::none:
        case ContinuousFamily::interior_atoms:
            return 0.0;
        case ContinuousFamily::uniform:
            return x <= eta ? cont_scale : 0.0;
        case ContinuousFamily::beta: {
            if (x > eta) return 0.0;
            double lo = (1.0 - beta_alpha) * std::log(x) + (beta_alpha - 1.0) * std::log1p(-x);
            return cont_scale * std::exp(lo - log_beta(2.0 - beta_alpha, beta_alpha));
        }
        case ContinuousFamily::density_fn: {
            if (x > eta) return 0.0;
            double v = cont_scale * density(x);
            if (v < 0.0 || std::isnan(v))
                throw InvalidMeasureError("density evaluated to a negative or NaN value");
            return v;
        }
    }
    return 0.0;
}

double LambdaSpec::continuous_mass_below(double y) const {
    y = std::min(y, eta);
    if (y <= 0.0) return 0.0;
    switch (family) {
        case ContinuousFamily::none:
            return 0.0;
        case ContinuousFamily::uniform:
            return cont_scale * y;
        case ContinuousFamily::beta:
            return cont_scale * incomplete_beta(2.0 - beta_alpha, beta_alpha, y);
        case ContinuousFamily::interior_atoms: {
            double m = 0.0;
            for (auto& [x, w] : atoms)
                if (x <= y) m += w;
            return m;
        }
        case ContinuousFamily::density_fn: {
            QuadOptions opt;
            opt.abs_tol = 1e-12;
            auto f = [this](double x) { return continuous_density(x); };
            return integrate_endpoint_graded(f, 0.0, y, opt).value;
        }
    }
    return 0.0;
}

LambdaSpec LambdaSpec::kingman(double mass) {
    LambdaSpec s;
    s.atom_zero = mass;
    s.total_mass = mass;
    validate_common(s);
    return s;
}

LambdaSpec LambdaSpec::uniform(double scale, double eta, double atom_zero) {
    LambdaSpec s;
    s.family = ContinuousFamily::uniform;
    s.cont_scale = scale;
    s.eta = eta;
    s.atom_zero = atom_zero;
    s.total_mass = atom_zero + continuous_total_mass(s);
    validate_common(s);
    return s;
}

LambdaSpec LambdaSpec::beta_family(double alpha, double scale, double eta, double atom_zero) {
    if (!(alpha > 0.0) || !(alpha < 2.0))
        throw DomainError("beta family requires alpha in (0,2)");
    LambdaSpec s;
    s.family = ContinuousFamily::beta;
    s.beta_alpha = alpha;
    s.cont_scale = scale;
    s.eta = eta;
    s.atom_zero = atom_zero;
    s.total_mass = atom_zero + continuous_total_mass(s);
    validate_common(s);
    return s;
}

LambdaSpec LambdaSpec::interior(std::vector<std::pair<double, double>> atoms, double atom_zero,
                                double eta) {
    LambdaSpec s;
    s.family = ContinuousFamily::interior_atoms;
    s.atoms = std::move(atoms);
    s.eta = eta;
    s.atom_zero = atom_zero;
    for (auto& [x, m] : s.atoms) {
        if (!(x > 0.0) || !(x < 1.0)) throw InvalidMeasureError("interior atom outside (0,1)");
        if (!(m > 0.0)) throw InvalidMeasureError("interior atom mass must be positive");
    }
    std::sort(s.atoms.begin(), s.atoms.end());
    s.total_mass = atom_zero + continuous_total_mass(s);
    validate_common(s);
    return s;
}

LambdaSpec LambdaSpec::from_density(std::function<double(double)> density, std::string source,
                                    double scale, double eta, double atom_zero) {
    LambdaSpec s;
    s.family = ContinuousFamily::density_fn;
    s.density = std::move(density);
    s.density_source = std::move(source);
    s.cont_scale = scale;
    s.eta = eta;
    s.atom_zero = atom_zero;
    s.total_mass = atom_zero + continuous_total_mass(s);
    validate_common(s);
    return s;
}

NormalizedMeasure normalize(const LambdaSpec& spec) {
    if (!(spec.total_mass > 0.0)) throw InvalidMeasureError("cannot normalize a zero-mass measure");
    double scale = spec.total_mass;
    LambdaSpec out = spec;
    out.atom_zero /= scale;
    out.atom_one /= scale;
    out.cont_scale /= scale;
    for (auto& [x, m] : out.atoms) m /= scale;
    out.total_mass = 1.0;
    return {out, scale};
}

LambdaSpec truncate(const LambdaSpec& spec, double eta) {
    if (!(eta > 0.0) || eta > 1.0) throw DomainError("truncation eta must lie in (0,1]");
    LambdaSpec out = spec;
    out.eta = std::min(spec.eta, eta);
    if (out.eta < 1.0) out.atom_one = 0.0;
    if (out.family == ContinuousFamily::interior_atoms) {
        std::vector<std::pair<double, double>> kept;
        for (auto& a : out.atoms)
            if (a.first <= out.eta) kept.push_back(a);
        out.atoms = std::move(kept);
    }
    out.total_mass = out.atom_zero + out.atom_one + continuous_total_mass(out);
    if (!(out.total_mass > 0.0))
        throw InvalidMeasureError("truncation removed all mass");
    return out;
}

double integrate(const LambdaSpec& spec, const std::function<double(double)>& f, double tol) {
    if (!(tol > 0.0)) throw DomainError("integration tolerance must be positive");
    CompensatedSum acc;
    if (spec.atom_zero > 0.0) acc.add(spec.atom_zero * f(0.0));
    if (spec.atom_one > 0.0) acc.add(spec.atom_one * f(1.0));
    for (auto& [x, m] : spec.atoms)
        if (x <= spec.eta) acc.add(m * f(x));
    acc.add(integrate_continuous(spec, f, tol));
    return acc.value();
}

double nu_integrate(const LambdaSpec& spec, const std::function<double(double)>& g,
                    std::optional<double> limit_at_zero, double tol) {
    if (!(tol > 0.0)) throw DomainError("integration tolerance must be positive");
    if (spec.atom_zero > 0.0 && !limit_at_zero)
        throw ContractError("nu_integrate: measure has an atom at 0, the x->0 limit of g(x)/x^2 "
                            "must be supplied");
    CompensatedSum acc;
    if (spec.atom_zero > 0.0) acc.add(spec.atom_zero * *limit_at_zero);
    if (spec.atom_one > 0.0) acc.add(spec.atom_one * g(1.0));
    for (auto& [x, m] : spec.atoms)
        if (x <= spec.eta) acc.add(m * g(x) / (x * x));
    auto h = [&g](double x) { return g(x) / (x * x); };
    acc.add(integrate_continuous(spec, h, tol));
    return acc.value();
}

std::uint64_t content_hash(const LambdaSpec& spec) {
    std::string repr = measure_to_json(spec);
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a 64
    for (unsigned char c : repr) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

namespace {

std::string family_name(const LambdaSpec& s) {
    switch (s.family) {
        case ContinuousFamily::none: return "dirac0";
        case ContinuousFamily::uniform: return "uniform";
        case ContinuousFamily::beta: return "beta";
        case ContinuousFamily::interior_atoms: return "atoms";
        case ContinuousFamily::density_fn: return "density_expr";
    }
    return "dirac0";
}

}  // namespace

LambdaSpec measure_from_json(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw DomainError(std::string("malformed measure file: ") + e.what());
    }
    std::string family = j.value("family", "dirac0");
    double atom_zero = j.value("atom_zero", family == "dirac0" ? 1.0 : 0.0);
    double eta = j.value("eta", 1.0);
    double scale = j.value("mass_scale", 1.0);
    double atom_one = j.value("atom_one", 0.0);

    LambdaSpec s;
    if (family == "dirac0") {
        s = LambdaSpec::kingman(atom_zero);
    } else if (family == "uniform") {
        s = LambdaSpec::uniform(scale, eta, atom_zero);
    } else if (family == "beta") {
        if (!j.contains("alpha")) throw DomainError("beta measure requires \"alpha\"");
        s = LambdaSpec::beta_family(j["alpha"].get<double>(), scale, eta, atom_zero);
    } else if (family == "atoms") {
        std::vector<std::pair<double, double>> atoms;
        for (auto& entry : j.value("atoms", nlohmann::json::array()))
            atoms.emplace_back(entry.at(0).get<double>(), scale * entry.at(1).get<double>());
        s = LambdaSpec::interior(std::move(atoms), atom_zero, eta);
    } else if (family == "density_expr") {
        if (!j.contains("expr")) throw DomainError("density_expr measure requires \"expr\"");
        std::string expr = j["expr"].get<std::string>();
        s = LambdaSpec::from_density(parse_density_expr(expr), expr, scale, eta, atom_zero);
    } else {
        throw DomainError("unknown measure family: " + family);
    }
    if (atom_one > 0.0) {
        s.atom_one = atom_one;
        s.total_mass += atom_one;
        validate_common(s);
    }
    return s;
}

std::string measure_to_json(const LambdaSpec& spec) {
    nlohmann::ordered_json j;
    char buf[40];
    auto fmt = [&buf](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::stod(buf);
    };
    j["schema"] = 1;
    j["family"] = family_name(spec);
    j["atom_zero"] = fmt(spec.atom_zero);
    if (spec.atom_one != 0.0) j["atom_one"] = fmt(spec.atom_one);
    if (spec.family == ContinuousFamily::beta) j["alpha"] = fmt(spec.beta_alpha);
    if (spec.family == ContinuousFamily::interior_atoms) {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (auto& [x, m] : spec.atoms) arr.push_back({fmt(x), fmt(m)});
        j["atoms"] = arr;
    }
    if (spec.family == ContinuousFamily::density_fn) j["expr"] = spec.density_source;
    if (spec.has_continuous_density() || spec.family == ContinuousFamily::interior_atoms)
        j["mass_scale"] = fmt(spec.family == ContinuousFamily::interior_atoms ? 1.0
                                                                              : spec.cont_scale);
    j["eta"] = fmt(spec.eta);
    return j.dump();
}

LambdaSpec load_measure_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open measure file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return measure_from_json(ss.str());
}

}  // namespace cdi

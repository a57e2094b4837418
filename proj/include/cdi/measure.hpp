#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cdi {

enum class ContinuousFamily { none, uniform, beta, interior_atoms, density_fn };

/// A finite measure on [0,1]: an atom at 0 of mass c (the Kingman part), an
/// optional atom at 1 (representable, rejected by every coming-down-from-
/// infinity operation), and a continuous part on (0, eta]. Immutable after
/// construction; safe to share across threads.
struct LambdaSpec {
    double atom_zero = 0.0;
    double atom_one = 0.0;
    ContinuousFamily family = ContinuousFamily::none;
    double beta_alpha = 0.0;  // family beta: exponent alpha in (0,2)
    double cont_scale = 1.0;  // multiplies the continuous part
    std::vector<std::pair<double, double>> atoms;  // interior atoms (x, mass), x in (0,1)
    std::function<double(double)> density;         // family density_fn, pointwise on (0,1)
    std::string density_source;                    // expression text, when parsed from one
    double eta = 1.0;          // truncation: zero mass on (eta, 1]
    double total_mass = 0.0;   // cached at construction

    static LambdaSpec kingman(double mass = 1.0);
    static LambdaSpec uniform(double scale = 1.0, double eta = 1.0, double atom_zero = 0.0);
    static LambdaSpec beta_family(double alpha, double scale = 1.0, double eta = 1.0,
                                  double atom_zero = 0.0);
    static LambdaSpec interior(std::vector<std::pair<double, double>> atoms,
                               double atom_zero = 0.0, double eta = 1.0);
    static LambdaSpec from_density(std::function<double(double)> density, std::string source,
                                   double scale = 1.0, double eta = 1.0, double atom_zero = 0.0);

    /// Pointwise value of the continuous density (including scale) at x in (0,1).
    /// Zero for the none / interior_atoms families.
    double continuous_density(double x) const;

    /// Mass of the continuous part restricted to [0, y].
    double continuous_mass_below(double y) const;

    bool has_continuous_density() const {
        return family == ContinuousFamily::uniform || family == ContinuousFamily::beta ||
               family == ContinuousFamily::density_fn;
    }
};

struct NormalizedMeasure {
    LambdaSpec spec;  // total mass 1
    double scale;     // original mass; u_orig(q) = u_norm(q)/scale, v_orig(t) = v_norm(scale t)
};

/// Rescales to unit total mass. Throws InvalidMeasureError on zero mass.
NormalizedMeasure normalize(const LambdaSpec& spec);

/// Restriction of the measure to [0, eta]. Throws DomainError for eta outside (0,1].
LambdaSpec truncate(const LambdaSpec& spec, double eta);

/// integral of f against Lambda, absolute error <= tol.
double integrate(const LambdaSpec& spec, const std::function<double(double)>& f,
                 double tol = 1e-10);

/// integral of g against nu(dx) = x^{-2} Lambda(dx) over (0,1], plus
/// atom_zero * lim_{x->0} g(x)/x^2. The limit must be supplied whenever
/// atom_zero > 0 (ContractError otherwise); g(x)/x^2 must stay bounded near 0.
double nu_integrate(const LambdaSpec& spec, const std::function<double(double)>& g,
                    std::optional<double> limit_at_zero, double tol = 1e-10);

/// Content hash of the measure description (used as provenance id).
std::uint64_t content_hash(const LambdaSpec& spec);

/// JSON round trip for the measure spec file format (schema 1).
LambdaSpec measure_from_json(const std::string& json_text);
std::string measure_to_json(const LambdaSpec& spec);
LambdaSpec load_measure_file(const std::string& path);

}  // namespace cdi

#include <doctest.h>

#include <cmath>
#include <functional>

#include "cdi/errors.hpp"
#include "cdi/expr.hpp"
#include "cdi/measure.hpp"

using namespace cdi;

namespace {

// Independent oracle: adaptive Simpson, recursion on interval halves.
double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                   double fm, double fb, double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

double simpson(const std::function<double(double)>& f, double a, double b, double tol = 1e-12) {
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 40);
}

}  // namespace

TEST_CASE("normalize rescales atoms and continuous parts") {
    auto two_dirac = LambdaSpec::kingman(2.0);
    auto [norm, scale] = normalize(two_dirac);
    CHECK(scale == 2.0);
    CHECK(norm.atom_zero == doctest::Approx(1.0));
    CHECK(norm.total_mass == doctest::Approx(1.0));

    auto unit = LambdaSpec::kingman(1.0);
    CHECK(normalize(unit).scale == 1.0);

    auto three_uniform = LambdaSpec::uniform(3.0);
    auto n3 = normalize(three_uniform);
    CHECK(n3.scale == doctest::Approx(3.0));
    // quadrature oracle on the normalized density
    double mass = integrate(n3.spec, [](double) { return 1.0; }, 1e-12);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("truncation masses") {
    auto dirac = LambdaSpec::kingman(1.0);
    auto td = truncate(dirac, 0.25);
    CHECK(td.total_mass == doctest::Approx(1.0));
    CHECK(td.atom_zero == 1.0);

    auto uni = LambdaSpec::uniform(1.0);
    CHECK(truncate(uni, 0.25).total_mass == doctest::Approx(0.25).epsilon(1e-12));

    // Beta(0.5, 1.5), i.e. alpha = 1.5: mass below 1/4 has the closed form
    // 1/3 + sqrt(3)/(2 pi), re-derived here by Simpson after x = u^2.
    auto beta = LambdaSpec::beta_family(1.5);
    double oracle = simpson([](double u) { return 2.0 * std::sqrt(1.0 - u * u); }, 0.0, 0.5) /
                    (M_PI / 2.0);
    CHECK(oracle == doctest::Approx(1.0 / 3.0 + std::sqrt(3.0) / (2.0 * M_PI)).epsilon(1e-12));
    CHECK(truncate(beta, 0.25).total_mass == doctest::Approx(oracle).epsilon(1e-10));

    CHECK_THROWS_AS(truncate(uni, 0.0), DomainError);
    CHECK_THROWS_AS(truncate(uni, 1.5), DomainError);
}

TEST_CASE("integrate against Lambda") {
    auto dirac = LambdaSpec::kingman(1.0);
    CHECK(integrate(dirac, [](double) { return 1.0; }) == doctest::Approx(1.0));

    auto uni = LambdaSpec::uniform(1.0);
    CHECK(integrate(uni, [](double x) { return x; }) == doctest::Approx(0.5).epsilon(1e-11));

    // second moment of Beta(0.5, 1.5) = a(a+1)/((a+b)(a+b+1)) = 1/8
    auto beta = LambdaSpec::beta_family(1.5);
    CHECK(integrate(beta, [](double x) { return x * x; }) ==
          doctest::Approx(0.125).epsilon(1e-10));
}

TEST_CASE("nu_integrate with and without the atom at zero") {
    auto dirac = LambdaSpec::kingman(1.0);
    double q = 2.0;
    auto g = [q](double x) { return std::exp(-q * x) - 1.0 + q * x; };
    CHECK(nu_integrate(dirac, g, q * q / 2.0) == doctest::Approx(2.0));
    CHECK_THROWS_AS(nu_integrate(dirac, g, std::nullopt), ContractError);

    auto uni = LambdaSpec::uniform(1.0);
    CHECK(nu_integrate(uni, [](double x) { return x * x; }, std::nullopt) ==
          doctest::Approx(1.0).epsilon(1e-10));

    // Beta(0.5,1.5): integral of x^2 (1-x) against nu = 1 - mean = 3/4
    auto beta = LambdaSpec::beta_family(1.5);
    CHECK(nu_integrate(beta, [](double x) { return x * x * (1.0 - x); }, std::nullopt) ==
          doctest::Approx(0.75).epsilon(1e-9));
}

TEST_CASE("integrate is linear and additive over mixture pieces") {
    auto mix = LambdaSpec::uniform(0.5, 1.0, 0.3);
    auto f = [](double x) { return std::cos(3.0 * x); };
    auto g = [](double x) { return x * x + 1.0; };
    double lhs = integrate(mix, [&](double x) { return 2.0 * f(x) - 0.7 * g(x); });
    double rhs = 2.0 * integrate(mix, f) - 0.7 * integrate(mix, g);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));

    // additivity over disjoint support: atoms vs continuous
    auto atoms = LambdaSpec::interior({{0.2, 0.4}, {0.9, 0.1}});
    double whole = integrate(atoms, f) + integrate(mix, f);
    auto combined = LambdaSpec::interior({{0.2, 0.4}, {0.9, 0.1}}, 0.0, 1.0);
    double sum2 = integrate(combined, f) + 0.3 * f(0.0) +
                  0.5 * simpson([&](double x) { return f(x); }, 0.0, 1.0);
    CHECK(whole == doctest::Approx(sum2).epsilon(1e-9));
}

TEST_CASE("truncation composes through the minimum") {
    auto beta = LambdaSpec::beta_family(1.2);
    auto a = truncate(truncate(beta, 0.5), 0.125);
    auto b = truncate(beta, 0.125);
    CHECK(a.total_mass == doctest::Approx(b.total_mass).epsilon(1e-12));
    CHECK(a.eta == b.eta);

    auto c = truncate(truncate(beta, 0.125), 0.5);
    CHECK(c.eta == doctest::Approx(0.125));
}

TEST_CASE("normalize then un-scale reproduces integrals") {
    auto spec = LambdaSpec::beta_family(1.5, 2.5, 1.0, 0.5);
    auto [norm, scale] = normalize(spec);
    auto f = [](double x) { return 1.0 + x; };
    CHECK(integrate(spec, f) == doctest::Approx(scale * integrate(norm, f)).epsilon(1e-10));
}

TEST_CASE("measure json round trip") {
    auto beta = LambdaSpec::beta_family(1.5, 2.0, 0.25, 0.125);
    auto back = measure_from_json(measure_to_json(beta));
    CHECK(content_hash(back) == content_hash(beta));
    CHECK(back.total_mass == doctest::Approx(beta.total_mass).epsilon(1e-14));

    auto expr = measure_from_json(
        R"js({"family":"density_expr","expr":"3*pow(x,0.5)","atom_zero":0.0})js");
    // density 3 sqrt(x): mass 3*(2/3) = 2, int x dLambda = 3*(2/5) = 6/5
    CHECK(expr.total_mass == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(integrate(expr, [](double x) { return x; }) ==
          doctest::Approx(6.0 / 5.0).epsilon(1e-9));

    CHECK_THROWS_AS(measure_from_json("{\"family\":\"nope\"}"), DomainError);
    CHECK_THROWS_AS(measure_from_json("not json"), DomainError);
}

TEST_CASE("density expressions") {
    auto f = parse_density_expr("pow(x, 2) * exp(-x) + 1 / (2 + x) - log(x)");
    double x = 0.37;
    CHECK(f(x) == doctest::Approx(x * x * std::exp(-x) + 1.0 / (2.0 + x) - std::log(x)));
    CHECK_THROWS_AS(parse_density_expr("pow(x"), DomainError);
    CHECK_THROWS_AS(parse_density_expr("x + y"), DomainError);
    CHECK_THROWS_AS(parse_density_expr("1 + "), DomainError);
}

TEST_CASE("invalid measures are rejected") {
    CHECK_THROWS_AS(LambdaSpec::kingman(0.0), InvalidMeasureError);
    CHECK_THROWS_AS(LambdaSpec::beta_family(2.0), DomainError);
    CHECK_THROWS_AS(LambdaSpec::interior({{1.5, 1.0}}), InvalidMeasureError);
    CHECK_THROWS_AS(LambdaSpec::uniform(1.0, 1.5), DomainError);
    // negative density caught on evaluation
    auto bad = [] {
        auto s = LambdaSpec::from_density([](double x) { return x - 0.5; }, "x - 0.5");
        return s;
    };
    CHECK_THROWS_AS(bad(), InvalidMeasureError);
}

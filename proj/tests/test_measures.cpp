#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "metricpoints/measures.hpp"

#include <cmath>

using namespace mps;

TEST_CASE("power cdf inversion") {
    PowerCdf uniform(1.0);
    CHECK(uniform.inverse_sup(0.25) == doctest::Approx(0.25).epsilon(1e-14));
    PowerCdf quad(2.0);
    CHECK(quad.inverse_sup(0.5) == doctest::Approx(0.7071067811865476).epsilon(1e-14));
    CHECK_THROWS_AS(quad.inverse_sup(1.5), std::out_of_range);
    CHECK_THROWS_AS(quad.inverse_sup(-0.1), std::out_of_range);
}

TEST_CASE("piecewise-linear cdf takes the right edge of a plateau") {
    PiecewiseLinearCdf cdf({0.0, 0.4, 0.6, 1.0}, {0.0, 0.5, 0.5, 1.0});
    CHECK(cdf.inverse_sup(0.5) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(cdf.inverse_sup(0.25) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(cdf.inverse_sup(1.0) == doctest::Approx(1.0));
    CHECK(cdf.inverse_sup(0.0) == doctest::Approx(0.0));
    CHECK(cdf.value(0.5) == doctest::Approx(0.5));
}

TEST_CASE("generic bisection inversion honors the plateau convention") {
    // continuous density vanishing on [0.4, 0.6]; the numeric path must
    // still land on the right plateau edge (hard steps belong in the
    // piecewise-linear form)
    DensityCdf cdf([](double z) {
        return 6.25 * (std::max(0.0, 0.4 - z) + std::max(0.0, z - 0.6));
    });
    CHECK(cdf.value(0.4) == doctest::Approx(0.5).epsilon(1e-9));
    // accuracy at a zero-density plateau edge is set by the integration
    // noise floor, far looser than the closed forms
    CHECK(cdf.inverse_sup(0.5) == doctest::Approx(0.6).epsilon(1e-4));
    DensityCdf tri([](double z) { return 2.0 * z; });
    CHECK(tri.inverse_sup(0.5) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-10));
}

TEST_CASE("cube measures: masses, conditionals, samples") {
    auto uni = CubeMeasure::uniform(2);
    std::vector<double> lo = {0.25, 0.5}, hi = {0.75, 1.0};
    CHECK(uni.box_mass(lo, hi) == doctest::Approx(0.25));

    auto prod = CubeMeasure::named("product-4z1z2", 2);
    CHECK(prod.box_mass(lo, hi) ==
          doctest::Approx((0.75 * 0.75 - 0.25 * 0.25) * (1.0 - 0.25)));
    auto cond = prod.conditional_cdf(lo, hi, 1);
    // conditional along the second axis scales by the first-axis mass
    CHECK(cond->total() == doctest::Approx(0.75 * 0.75 - 0.25 * 0.25));

    RngStream rng(5);
    for (int s = 0; s < 200; ++s) {
        auto z = prod.sample_in_box(lo, hi, rng);
        CHECK(z[0] >= lo[0]);
        CHECK(z[0] <= hi[0]);
        CHECK(z[1] >= lo[1]);
        CHECK(z[1] <= hi[1]);
    }
}

TEST_CASE("general density measures integrate and sample") {
    auto gen = CubeMeasure::general(
        2, [](std::span<const double> z) { return 4.0 * z[0] * z[1]; }, "4z1z2");
    std::vector<double> lo = {0.0, 0.0}, hi = {0.5, 0.5};
    CHECK(gen.box_mass(lo, hi) == doctest::Approx(1.0 / 16.0).epsilon(1e-8));
    auto cond = gen.conditional_cdf(lo, hi, 1);
    CHECK(cond->value(0.5) == doctest::Approx(0.25 * 0.25).epsilon(1e-7));
    RngStream rng(7);
    auto z = gen.sample_in_box(lo, hi, rng);
    CHECK(z[0] <= 0.5);
    CHECK(z[1] <= 0.5);
}

TEST_CASE("rejection sampling reports degenerate cells") {
    auto gen = CubeMeasure::general(
        1, [](std::span<const double> z) { return z[0] >= 0.5 ? 2.0 : 0.0; }, "upper-half");
    RngStream rng(3);
    std::vector<double> lo = {0.6}, hi = {0.9};
    CHECK_NOTHROW(gen.sample_in_box(lo, hi, rng));
    std::vector<double> dead_lo = {0.0}, dead_hi = {0.4};
    CHECK_THROWS_AS(gen.sample_in_box(dead_lo, dead_hi, rng), PreconditionError);
}

TEST_CASE("tail function of interval and atomic measures") {
    auto xi = RadialMeasure::lebesgue(0.0, 0.5);
    CHECK(sigma_eval(xi, 0.0, 0.5) == doctest::Approx(0.5));
    CHECK(sigma_eval(xi, 0.5, 0.5) == doctest::Approx(0.0));
    CHECK(sigma_eval(xi, 0.2, 0.5) == doctest::Approx(0.3));
    CHECK_THROWS_AS(sigma_eval(xi, -0.1, 0.5), std::out_of_range);
    CHECK_THROWS_AS(sigma_eval(xi, 0.6, 0.5), std::out_of_range);

    auto atoms = RadialMeasure::atomic({0.0, 1.0, 2.0}, {1.0, 1.0, 1.0});
    CHECK(sigma_eval(atoms, 1.0, 2.0) == doctest::Approx(2.0));
    CHECK(sigma_eval(atoms, 0.0, 2.0) == doctest::Approx(3.0));
    CHECK(atoms.sigma(2.0) == doctest::Approx(1.0));  // closed atom at the top

    // sigma(a) - sigma(b) equals the mass of [a, b)
    RngStream rng(3);
    for (int i = 0; i < 200; ++i) {
        double a = rng.uniform(0.0, 2.0), b = rng.uniform(0.0, 2.0);
        if (a > b) std::swap(a, b);
        CHECK(atoms.sigma(a) - atoms.sigma(b) ==
              doctest::Approx(atoms.interval_mass(a, b)).epsilon(1e-12));
        CHECK(xi.sigma(a * 0.25) - xi.sigma(b * 0.25) ==
              doctest::Approx(xi.interval_mass(a * 0.25, b * 0.25)).epsilon(1e-12));
    }
}

TEST_CASE("lipschitz constants of radial measures") {
    auto xi = RadialMeasure::lebesgue(0.0, 1.0);
    CHECK(*xi.c0({}) == doctest::Approx(1.0));

    auto atoms = RadialMeasure::uniform_atomic({0.0, 1.0, 2.0, 3.0, 4.0});
    auto c0 = atoms.c0({0.0, 1.0, 2.0, 3.0, 4.0});
    REQUIRE(c0.has_value());
    CHECK(*c0 == doctest::Approx(0.2));
    // atoms over a continuum of radii admit no such constant
    CHECK_FALSE(atoms.c0({}).has_value());

    RationalRadialMeasure exact = RationalRadialMeasure::uniform_atomic(
        {Rat(0), Rat(1), Rat(2), Rat(3), Rat(4)});
    CHECK(exact.c0() == Rat(1, 5));
    CHECK(exact.sigma(Rat(1)) == Rat(4, 5));
}

TEST_CASE("radial integration against both kinds") {
    auto xi = RadialMeasure::lebesgue(0.0, 2.0);
    CHECK(xi.integrate([](double r) { return r; }) == doctest::Approx(2.0));
    auto atoms = RadialMeasure::atomic({0.5, 1.5}, {2.0, 1.0});
    CHECK(atoms.integrate([](double r) { return r * r; }) ==
          doctest::Approx(2.0 * 0.25 + 1.0 * 2.25));
}

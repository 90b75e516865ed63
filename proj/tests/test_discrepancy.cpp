#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "metricpoints/discrepancy.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace mps;

namespace {

PointSet all_hamming_points(const Space& h) {
    PointSet ps;
    ps.space_name = h.name();
    for (std::size_t i = 0; i < h.point_count(); ++i) ps.points.push_back(h.point_at(i));
    return ps;
}

}  // namespace

TEST_CASE("distance sums over ordered pairs") {
    auto circle = make_space("circle");
    PointSet one = lattice_points(*circle, 1);
    CHECK(sum_distances(*circle, one) == doctest::Approx(0.0));

    PointSet four = lattice_points(*circle, 4);
    CHECK(sum_distances(*circle, four) == doctest::Approx(4.0).epsilon(1e-13));

    // full two-bit cube: enumeration over the 16 ordered pairs gives 16
    auto h2 = make_space("hamming2");
    PointSet all = all_hamming_points(*h2);
    double brute = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) brute += __builtin_popcount(i ^ j);
    CHECK(brute == doctest::Approx(16.0));
    CHECK(sum_distances(*h2, all) == doctest::Approx(brute));

    // duplicates count with multiplicity
    PointSet dup = four;
    dup.points.push_back({0.0});
    CHECK(sum_distances(*circle, dup) ==
          doctest::Approx(4.0 + 2.0 * (0.25 + 0.5 + 0.25)).epsilon(1e-13));
}

TEST_CASE("local discrepancy") {
    auto circle = make_space("circle");
    PointSet two;
    two.space_name = "circle";
    two.points = {{0.0}, {0.5}};
    CHECK(local_discrepancy(*circle, two, {0.0}, 0.1) == doctest::Approx(0.6).epsilon(1e-13));
    CHECK(local_discrepancy(*circle, two, {0.2}, 0.5) == doctest::Approx(0.0));

    auto h2 = make_space("hamming2");
    PointSet all = all_hamming_points(*h2);
    for (std::size_t y = 0; y < 4; ++y)
        CHECK(local_discrepancy(*h2, all, h2->point_at(y), 1.0) == doctest::Approx(0.0));
    CHECK_THROWS_AS(local_discrepancy(*circle, two, {0.0}, 0.7), std::out_of_range);
}

TEST_CASE("squared discrepancy at a fixed radius: exact paths") {
    auto h2 = make_space("hamming2");
    PointSet all = all_hamming_points(*h2);
    CHECK(l2_discrepancy_r(*h2, all, 1.0, L2Mode::Integral).value == doctest::Approx(0.0));
    CHECK(l2_discrepancy_r(*h2, all, 1.0, L2Mode::Kernel).value ==
          doctest::Approx(0.0).epsilon(1e-14));

    auto circle = make_space("circle");
    PointSet two;
    two.space_name = "circle";
    two.points = {{0.0}, {0.5}};
    // piecewise integration: deviation is 0.6^2 on measure 0.4 and 0.4^2 on 0.6
    CHECK(l2_discrepancy_r(*circle, two, 0.1, L2Mode::Integral).value ==
          doctest::Approx(0.24).epsilon(1e-13));
    CHECK(l2_discrepancy_r(*circle, two, 0.1, L2Mode::Integral).value ==
          doctest::Approx(oracles::circle_lambda_r_grid({0.0, 0.5}, 0.1, 400000))
              .epsilon(1e-4));
    PointSet single = lattice_points(*circle, 1);
    CHECK(l2_discrepancy_r(*circle, single, 0.5, L2Mode::Integral).value ==
          doctest::Approx(0.0));
}

TEST_CASE("integral and kernel modes agree") {
    auto circle = make_space("circle");
    RngStream rng(3);
    for (int rep = 0; rep < 5; ++rep) {
        PointSet ps = sample_iid(*circle, 3 + rep, 100 + rep);
        double r = rng.uniform(0.0, 0.5);
        double integral = l2_discrepancy_r(*circle, ps, r, L2Mode::Integral).value;
        double kernel = l2_discrepancy_r(*circle, ps, r, L2Mode::Kernel).value;
        CHECK(integral == doctest::Approx(kernel).epsilon(1e-9));
    }
    for (const char* name : {"hamming3", "path6"}) {
        auto space = make_space(name);
        for (int rep = 0; rep < 5; ++rep) {
            PointSet ps = sample_iid(*space, 4, 200 + rep);
            for (double r : space->radii_set()) {
                double integral = l2_discrepancy_r(*space, ps, r, L2Mode::Integral).value;
                double kernel = l2_discrepancy_r(*space, ps, r, L2Mode::Kernel).value;
                CHECK(integral == doctest::Approx(kernel).epsilon(1e-11));
            }
        }
    }
    auto torus = make_space("torus2");
    PointSet ps = sample_iid(*torus, 5, 31);
    DiscrepancyOpts opts{40000, 9};
    Estimate integral = l2_discrepancy_r(*torus, ps, 0.3, L2Mode::Integral, opts);
    Estimate kernel = l2_discrepancy_r(*torus, ps, 0.3, L2Mode::Kernel, opts);
    double tol = 3.0 * std::hypot(integral.stderr_, kernel.stderr_) + 1e-12;
    CHECK(std::abs(integral.value - kernel.value) <= tol);
}

TEST_CASE("radial-averaged discrepancy") {
    auto circle = make_space("circle");
    PointSet two;
    two.space_name = "circle";
    two.points = {{0.0}, {0.5}};
    auto xi = RadialMeasure::lebesgue(0.0, 0.5);
    double lam = l2_discrepancy_xi(*circle, two, xi).value;
    CHECK(lam > 0.0);
    // cross-check against the generic center-sampling estimator
    RngStream rng(77);
    ConfigStats mc = config_stats_mc(*circle, xi, two.points, 60000, rng);
    CHECK(std::abs(mc.lambda_xi - lam) < 0.02 * lam + 1e-4);

    // a single atom at the diameter sees no deviation
    auto top = RadialMeasure::atomic({0.5}, {1.0});
    CHECK(l2_discrepancy_xi(*circle, two, top).value == doctest::Approx(0.0));

    auto h2 = make_space("hamming2");
    PointSet all = all_hamming_points(*h2);
    CHECK(l2_discrepancy_xi(*h2, all, default_xi(*h2)).value == doctest::Approx(0.0));
}

TEST_CASE("symmetric-difference metric at fixed radius") {
    auto circle = make_space("circle");
    CHECK(symdiff_metric_r(*circle, {0.3}, {0.3}, 0.2).value == doctest::Approx(0.0));
    CHECK(symdiff_metric_r(*circle, {0.0}, {0.3}, 0.1).value ==
          doctest::Approx(0.4).epsilon(1e-13));

    auto h2 = make_space("hamming2");
    // balls of radius 1 around opposite corners share exactly half the cube
    CHECK(symdiff_metric_r(*h2, {0, 0}, {1, 1}, 1.0).value == doctest::Approx(0.5));

    // closed forms against Monte Carlo
    for (const char* name : {"torus2", "sphere2"}) {
        auto space = make_space(name);
        RngStream rng(5);
        Point y1 = space->sample(rng), y2 = space->sample(rng);
        double r = 0.4 * space->diameter();
        auto closed = space->symdiff_r_closed(y1, y2, r);
        REQUIRE(closed.has_value());
        long S = 200000;
        RngStream mc(17);
        long hits = 0;
        for (long s = 0; s < S; ++s) {
            Point y = space->sample(mc);
            if ((space->metric(y1, y) <= r) != (space->metric(y2, y) <= r)) ++hits;
        }
        double p = double(hits) / double(S);
        CHECK(std::abs(*closed - p) < 5.0 * oracles::mc_se(p, S));
    }
}

TEST_CASE("radial-averaged symmetric difference: closed form on the circle") {
    auto circle = make_space("circle");
    auto xi = RadialMeasure::lebesgue(0.0, 0.5);
    // hand-derived: t(1-t) for the full-range interval measure
    RngStream rng(9);
    for (int rep = 0; rep < 20; ++rep) {
        double t = rng.uniform(0.0, 0.5);
        CHECK(circle_rho_star_xi_exact(t, xi) == doctest::Approx(t - t * t).epsilon(1e-12));
    }
    CHECK(circle_mean_rho_star_xi_exact(xi) == doctest::Approx(1.0 / 6.0).epsilon(1e-13));
}

TEST_CASE("direct and tail-function modes agree") {
    auto circle = make_space("circle");
    auto xi = RadialMeasure::lebesgue(0.0, 0.5);
    RngStream rng(13);
    for (int rep = 0; rep < 5; ++rep) {
        Point y1 = circle->sample(rng), y2 = circle->sample(rng);
        double direct = symdiff_metric_xi(*circle, xi, y1, y2, SymdiffMode::Direct).value;
        double sigma = symdiff_metric_xi(*circle, xi, y1, y2, SymdiffMode::SigmaForm).value;
        CHECK(direct == doctest::Approx(sigma).epsilon(1e-9));
        CHECK(direct ==
              doctest::Approx(circle_rho_star_xi_exact(circle->metric(y1, y2), xi))
                  .epsilon(1e-9));
    }
    auto h3 = make_space("hamming3");
    auto xih = default_xi(*h3);
    RngStream rngh(15);
    for (int rep = 0; rep < 5; ++rep) {
        Point y1 = h3->sample(rngh), y2 = h3->sample(rngh);
        double direct = symdiff_metric_xi(*h3, xih, y1, y2, SymdiffMode::Direct).value;
        double sigma = symdiff_metric_xi(*h3, xih, y1, y2, SymdiffMode::SigmaForm).value;
        CHECK(direct == doctest::Approx(sigma).epsilon(1e-12));
    }
    auto torus = make_space("torus2");
    auto xit = RadialMeasure::lebesgue(0.0, torus->diameter());
    RngStream rngt(21);
    DiscrepancyOpts opts{30000, 3};
    for (int rep = 0; rep < 3; ++rep) {
        Point y1 = torus->sample(rngt), y2 = torus->sample(rngt);
        Estimate direct = symdiff_metric_xi(*torus, xit, y1, y2, SymdiffMode::Direct, opts);
        Estimate sigma = symdiff_metric_xi(*torus, xit, y1, y2, SymdiffMode::SigmaForm, opts);
        double tol = 3.0 * std::hypot(direct.stderr_, sigma.stderr_) + 2e-3;
        CHECK(std::abs(direct.value - sigma.value) <= tol);
    }
}

TEST_CASE("radial averages vanish at coincident centers in both modes") {
    auto circle = make_space("circle");
    auto xi = RadialMeasure::lebesgue(0.0, 0.5);
    CHECK(symdiff_metric_xi(*circle, xi, {0.3}, {0.3}, SymdiffMode::Direct).value ==
          doctest::Approx(0.0));
    CHECK(symdiff_metric_xi(*circle, xi, {0.3}, {0.3}, SymdiffMode::SigmaForm).value ==
          doctest::Approx(0.0));
    auto torus = make_space("torus2");
    auto xit = RadialMeasure::lebesgue(0.0, torus->diameter());
    Point y = {0.2, 0.7};
    CHECK(symdiff_metric_xi(*torus, xit, y, y, SymdiffMode::Direct, {4000, 3}).value ==
          doctest::Approx(0.0));
    CHECK(symdiff_metric_xi(*torus, xit, y, y, SymdiffMode::SigmaForm, {4000, 3}).value ==
          doctest::Approx(0.0));
}

TEST_CASE("radial-averaged symmetric difference is a metric on samples") {
    auto circle = make_space("circle");
    auto xi = RadialMeasure::lebesgue(0.0, 0.5);
    RngStream rng(25);
    for (int rep = 0; rep < 500; ++rep) {
        double t1 = circle->metric(circle->sample(rng), circle->sample(rng));
        double a = circle_rho_star_xi_exact(t1, xi);
        CHECK(a >= 0.0);
        // triangle inequality through three random points
        Point x = circle->sample(rng), y = circle->sample(rng), z = circle->sample(rng);
        double xy = circle_rho_star_xi_exact(circle->metric(x, y), xi);
        double xz = circle_rho_star_xi_exact(circle->metric(x, z), xi);
        double zy = circle_rho_star_xi_exact(circle->metric(z, y), xi);
        CHECK(xy <= xz + zy + 1e-12);
    }
}

TEST_CASE("kernel components") {
    auto h2 = make_space("hamming2");
    KernelComponents kc = kernel_components(*h2, 1.0);
    CHECK(kc.a0.value == doctest::Approx(9.0 / 8.0));
    CHECK(kc.a1({0, 0}).value == doctest::Approx(-3.0 / 8.0));

    auto circle = make_space("circle");
    KernelComponents kcc = kernel_components(*circle, 0.1);
    CHECK(kcc.a0.value == doctest::Approx(0.08).epsilon(1e-13));
    CHECK(kcc.a1({0.2}).value == doctest::Approx(0.12).epsilon(1e-13));
    KernelComponents kcl = kernel_components(*circle, 0.5);
    CHECK(kcl.a0.value == doctest::Approx(2.0));
    CHECK(kcl.a1({0.9}).value == doctest::Approx(-1.0));
}

TEST_CASE("two-point kernel identity on a center-dependent space") {
    // 2*lambda_r(y1,y2) + rho*_r(y1,y2) = A0 + A1(y1) + A1(y2), checked by
    // Monte Carlo on the unit square where ball volumes depend on the center
    auto cube = make_space("cube2");
    RngStream rng(41);
    Point y1 = cube->sample(rng), y2 = cube->sample(rng);
    double r = 0.35;
    const long S = 120000;
    RngStream mc(43);
    RunningStats lam;
    for (long s = 0; s < S; ++s) {
        Point y = cube->sample(mc);
        double v = cube->ball_volume(y, r).value;
        double d1 = (cube->metric(y1, y) <= r ? 1.0 : 0.0) - v;
        double d2 = (cube->metric(y2, y) <= r ? 1.0 : 0.0) - v;
        lam.add(d1 * d2);
    }
    DiscrepancyOpts opts{120000, 47};
    KernelComponents kc = kernel_components(*cube, r, opts);
    Estimate a11 = kc.a1(y1), a12 = kc.a1(y2);
    Estimate star = symdiff_metric_r(*cube, y1, y2, r, opts);
    double lhs = 2.0 * lam.mean() + star.value;
    double rhs = kc.a0.value + a11.value + a12.value;
    double se = std::sqrt(4.0 * lam.stderr_of_mean() * lam.stderr_of_mean() +
                          star.stderr_ * star.stderr_ + kc.a0.stderr_ * kc.a0.stderr_ +
                          a11.stderr_ * a11.stderr_ + a12.stderr_ * a12.stderr_);
    CHECK(std::abs(lhs - rhs) <= 4.0 * se);
}

TEST_CASE("pair mean of the symmetric difference via ball volumes") {
    auto circle = make_space("circle");
    auto xi = RadialMeasure::lebesgue(0.0, 0.5);
    CHECK(mean_rho_star_xi(*circle, xi).value == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
    // direct double integral over pairs as an oracle
    RngStream rng(51);
    RunningStats direct;
    for (long s = 0; s < 100000; ++s) {
        double t = circle->metric(circle->sample(rng), circle->sample(rng));
        direct.add(circle_rho_star_xi_exact(t, xi));
    }
    CHECK(std::abs(direct.mean() - 1.0 / 6.0) < 4.0 * direct.stderr_of_mean());

    auto cube = make_space("cube2");
    auto xic = RadialMeasure::lebesgue(0.0, cube->diameter());
    Estimate m = mean_rho_star_xi(*cube, xic, {30000, 7});
    RngStream rng2(53);
    RunningStats oracle;
    for (long s = 0; s < 200000; ++s) {
        Point y1 = cube->sample(rng2), y2 = cube->sample(rng2), y = cube->sample(rng2);
        oracle.add(std::abs(cube->metric(y1, y) - cube->metric(y2, y)));
    }
    CHECK(std::abs(m.value - oracle.mean()) <
          4.0 * std::hypot(m.stderr_, oracle.stderr_of_mean()));
}

TEST_CASE("tail-function Lipschitz bound on sampled pairs") {
    auto circle = make_space("circle");
    auto xi = RadialMeasure::lebesgue(0.0, 0.5);
    LipschitzCheck chk = lipschitz_check_rho_star(*circle, xi, 1000, 3);
    CHECK(chk.c0 == doctest::Approx(1.0));
    CHECK(chk.max_ratio <= 1.0 + 1e-9);

    auto h3 = make_space("hamming3");
    LipschitzCheck chk3 = lipschitz_check_rho_star(*h3, default_xi(*h3), 500, 5);
    CHECK(chk3.max_ratio <= chk3.c0 * (1.0 + 1e-9));

    // atomic measures on a continuum admit no constant
    auto atoms = RadialMeasure::atomic({0.1, 0.2}, {0.5, 0.5});
    CHECK_THROWS_AS(lipschitz_check_rho_star(*circle, atoms, 10, 1), UnsupportedError);
}

TEST_CASE("discrepancy report assembles consistently") {
    auto circle = make_space("circle");
    PointSet ps = lattice_points(*circle, 4);
    auto xi = RadialMeasure::lebesgue(0.0, 0.5);
    DiscrepancyReport rep = compute_discrepancy_report(*circle, ps, xi, {20000, 5});
    CHECK(rep.n == 4);
    CHECK(rep.rho_sum == doctest::Approx(4.0));
    CHECK(rep.lambda_xi.value >= 0.0);
    CHECK(rep.mean_rho.value == doctest::Approx(0.25));
    CHECK(rep.mean_rho_star.value == doctest::Approx(1.0 / 6.0).epsilon(1e-10));
    // the invariance identity ties the report's pieces together
    double lhs = 2.0 * rep.lambda_xi.value + rep.rho_star_sum.value;
    CHECK(lhs == doctest::Approx(16.0 * rep.mean_rho_star.value).epsilon(1e-9));
}

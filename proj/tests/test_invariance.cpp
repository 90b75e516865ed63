#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "metricpoints/invariance.hpp"
#include "metricpoints/serialize.hpp"

#include <cmath>

using namespace mps;

TEST_CASE("distance invariance detection") {
    auto h3 = make_space("hamming3");
    auto chk = check_distance_invariance(*h3);
    CHECK(chk.invariant);
    CHECK(chk.max_deviation == doctest::Approx(0.0));

    auto circle = make_space("circle");
    CHECK(check_distance_invariance(*circle, 6, 4, 3, 20000).invariant);

    auto cube = make_space("cube2");
    CHECK_FALSE(check_distance_invariance(*cube, 6, 6, 3, 20000).invariant);

    auto p6 = make_space("path6");
    CHECK_FALSE(check_distance_invariance(*p6).invariant);
}

TEST_CASE("exact engine: pair identities hold on the bit cube") {
    auto h3 = make_space("hamming3");
    auto ex = h3->exact();
    REQUIRE(ex.has_value());
    ExactFiniteEngine eng(*ex, exact_uniform_xi(*ex));
    for (std::size_t a = 0; a < ex->size(); ++a)
        for (std::size_t b = 0; b < ex->size(); ++b) {
            for (std::size_t ri = 0; ri < ex->radii.size(); ++ri)
                CHECK(eng.pair_residual_r(a, b, ri) == Rat(0));
            CHECK(eng.pair_residual_xi(a, b) == Rat(0));
        }
}

TEST_CASE("exact engine: radial-averaged pair identities across cube sizes") {
    for (int n : {4, 5}) {
        auto h = make_space("hamming" + std::to_string(n));
        auto ex = h->exact();
        REQUIRE(ex.has_value());
        ExactFiniteEngine eng(*ex, exact_uniform_xi(*ex));
        for (std::size_t a = 0; a < ex->size(); ++a)
            for (std::size_t b = 0; b < ex->size(); ++b)
                CHECK(eng.pair_residual_xi(a, b) == Rat(0));
        // per-radius identities on a sample of pairs
        RngStream rng(60 + n);
        for (int rep = 0; rep < 20; ++rep) {
            std::size_t a = rng.uniform_index(ex->size());
            std::size_t b = rng.uniform_index(ex->size());
            for (std::size_t ri = 0; ri < ex->radii.size(); ++ri)
                CHECK(eng.pair_residual_r(a, b, ri) == Rat(0));
        }
    }
}

TEST_CASE("exact engine: pair identities fail off distance-invariance") {
    auto p6 = make_space("path6");
    auto ex = p6->exact();
    REQUIRE(ex.has_value());
    ExactFiniteEngine eng(*ex, exact_uniform_xi(*ex));
    bool any_nonzero = false;
    for (std::size_t a = 0; a < ex->size() && !any_nonzero; ++a)
        for (std::size_t b = 0; b < ex->size() && !any_nonzero; ++b)
            if (eng.pair_residual_xi(a, b) != 0) any_nonzero = true;
    CHECK(any_nonzero);
}

TEST_CASE("exact engine: the two mean routes coincide") {
    auto h2 = make_space("hamming2");
    auto ex = h2->exact();
    ExactFiniteEngine eng(*ex, exact_uniform_xi(*ex));
    // pair-sum route over all points equals the ball-volume route
    std::vector<std::size_t> all = {0, 1, 2, 3};
    Rat pair_route = eng.rho_star_sum(all) / Rat(16);
    CHECK(pair_route == eng.mean_rho_star());
}

TEST_CASE("invariance defect is exactly zero on random bit-cube multisets") {
    for (int n : {2, 3, 4}) {
        auto h = make_space("hamming" + std::to_string(n));
        auto xi = default_xi(*h);
        RngStream rng(1000 + n);
        for (int rep = 0; rep < 5; ++rep) {
            std::size_t count = 1 + rng.uniform_index(12);
            PointSet ps;
            ps.space_name = h->name();
            for (std::size_t i = 0; i < count; ++i) ps.points.push_back(h->sample(rng));
            InvarianceOutcome out = exact_invariance_defect(*h, ps, xi);
            CHECK(out.mode == "rational");
            CHECK(out.exact_zero);
            CHECK(out.defect == 0.0);
        }
    }
}

TEST_CASE("invariance defect on the circle via piecewise integration") {
    auto circle = make_space("circle");
    auto xi = RadialMeasure::lebesgue(0.0, 0.5);
    for (std::size_t n : {1, 4, 8}) {
        PointSet ps = lattice_points(*circle, n);
        InvarianceOutcome out = exact_invariance_defect(*circle, ps, xi);
        CHECK(out.mode == "piecewise");
        CHECK(std::abs(out.defect) < 1e-9);
    }
    RngStream rng(7);
    for (int rep = 0; rep < 10; ++rep) {
        PointSet ps = sample_iid(*circle, 2 + rng.uniform_index(10), 500 + rep);
        InvarianceOutcome out = exact_invariance_defect(*circle, ps, xi);
        CHECK(std::abs(out.defect) < 1e-9);
    }
}

TEST_CASE("invariance defect refuses center-dependent spaces") {
    auto cube = make_space("cube2");
    PointSet ps = sample_iid(*cube, 4, 3);
    CHECK_THROWS_AS(exact_invariance_defect(*cube, ps, default_xi(*cube)), PreconditionError);
}

TEST_CASE("invariance defect estimates on torus and sphere") {
    auto torus = make_space("torus2");
    auto xi = RadialMeasure::lebesgue(0.0, 0.5);  // within the embedded-disk regime
    PointSet ps = sample_iid(*torus, 6, 11);
    InvarianceOutcome out = exact_invariance_defect(*torus, ps, xi, {40000, 5});
    CHECK(out.mode == "estimate");
    CHECK(std::abs(out.defect) <= out.tolerance);

    auto sphere = make_space("sphere2");
    PointSet pss = sample_iid(*sphere, 5, 13);
    InvarianceOutcome outs =
        exact_invariance_defect(*sphere, pss, RadialMeasure::lebesgue(0.0, M_PI), {40000, 7});
    CHECK(outs.mode == "estimate");
    CHECK(std::abs(outs.defect) <= outs.tolerance);
}

TEST_CASE("product sampler draws one point per cell") {
    auto circle = make_space("circle");
    OmegaSampler sampler(equal_measure_partition(circle, 4));
    RngStream rng(3);
    for (int rep = 0; rep < 50; ++rep) {
        PointSet ps = sampler.sample(rng);
        REQUIRE(ps.size() == 4);
        for (int i = 0; i < 4; ++i) {
            CHECK(ps.points[i][0] >= 0.25 * i - 1e-12);
            CHECK(ps.points[i][0] <= 0.25 * (i + 1) + 1e-12);
        }
    }
    auto torus = make_space("torus2");
    OmegaSampler ts(equal_measure_partition(torus, 9));
    PointSet tp = ts.sample(rng);
    CHECK(tp.size() == 9);
    for (const auto& p : tp.points) torus->validate_point(p);
}

TEST_CASE("cell samples concentrate on the cell centroid") {
    auto cube = make_space("cube2");
    OmegaSampler sampler(equal_measure_partition(cube, 4));
    RngStream rng(5);
    RunningStats x, y;
    for (int s = 0; s < 10000; ++s) {
        Point p = sampler.sample_cell(0, rng);
        x.add(p[0]);
        y.add(p[1]);
    }
    CHECK(std::abs(x.mean() - 0.25) < 4.0 * x.stderr_of_mean());
    CHECK(std::abs(y.mean() - 0.25) < 4.0 * y.stderr_of_mean());
}

TEST_CASE("finite-cell sampling respects the restricted masses") {
    auto p6 = make_space("path6");
    OmegaSampler sampler(finite_partition(p6, {{0, 1, 2}, {3, 4, 5}}));
    RngStream rng(9);
    std::vector<long> counts(6, 0);
    for (int s = 0; s < 9000; ++s) {
        PointSet ps = sampler.sample(rng);
        ++counts[static_cast<std::size_t>(ps.points[0][0])];
        ++counts[static_cast<std::size_t>(ps.points[1][0])];
    }
    for (int i = 0; i < 6; ++i) CHECK(std::abs(counts[i] / 9000.0 - 1.0 / 3.0) < 0.02);
}

TEST_CASE("constant statistics have zero spread") {
    auto circle = make_space("circle");
    OmegaSampler sampler(equal_measure_partition(circle, 4));
    Estimate f1 = expectation_f1(sampler, [](const Point&) { return 1.0; }, 50, 3);
    CHECK(f1.value == doctest::Approx(4.0));
    CHECK(f1.stderr_ == doctest::Approx(0.0));
    Estimate f2 = expectation_f2(sampler, [](const Point&, const Point&) { return 1.0; }, 50, 3);
    CHECK(f2.value == doctest::Approx(12.0));  // ordered off-diagonal pairs
    CHECK(f2.stderr_ == doctest::Approx(0.0));
    CHECK_THROWS_AS(expectation_f1(sampler, [](const Point&) { return 1.0; }, 1, 3),
                    std::invalid_argument);
}

TEST_CASE("pair expectation matches its closed form on circle arcs") {
    auto circle = make_space("circle");
    const std::size_t n = 4;
    OmegaSampler sampler(equal_measure_partition(circle, n));
    auto rho = [&](const Point& a, const Point& b) { return circle->metric(a, b); };
    // arc self-integral of the geodesic distance: l^3/3 per arc of length l
    double closed = n * n * 0.25 - n * n * n * (std::pow(1.0 / n, 3) / 3.0);
    CHECK(closed == doctest::Approx(11.0 / 3.0));
    Estimate mc = expectation_f2(sampler, rho, 4000, 17);
    CHECK(std::abs(mc.value - closed) <= 3.0 * mc.stderr_);

    ProductExpectationResult closed_forms = product_expectation_closed_forms(
        sampler, [](const Point&) { return 1.0; }, rho, {60000, 4096, 5});
    CHECK(std::abs(closed_forms.f2.value - closed) <= 3.0 * closed_forms.f2.stderr_ + 1e-6);
    CHECK(closed_forms.f1.value == doctest::Approx(4.0));
}

TEST_CASE("exhaustive enumeration equals the closed forms on a finite space") {
    auto p6 = make_space("path6");
    auto ex = p6->exact();
    REQUIRE(ex.has_value());
    std::vector<std::vector<std::size_t>> cells2 = {{0, 1, 2}, {3, 4, 5}};
    std::vector<std::vector<std::size_t>> cells3 = {{0, 1}, {2, 3}, {4, 5}};

    auto rho = [&](std::size_t a, std::size_t b) { return ex->dist[a][b]; };
    auto indicator0 = [](std::size_t a) { return a == 0 ? Rat(1) : Rat(0); };

    for (const auto& cells : {cells2, cells3}) {
        const std::size_t n = cells.size();
        // brute force over all configurations, each weighted by the product
        // of renormalized cell masses
        Rat ef1 = 0, ef2 = 0;
        std::vector<std::size_t> pick(n, 0);
        std::function<void(std::size_t, Rat)> recurse = [&](std::size_t level, Rat w) {
            if (level == n) {
                Rat v1 = 0, v2 = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    v1 += indicator0(pick[i]);
                    for (std::size_t j = 0; j < n; ++j)
                        if (i != j) v2 += rho(pick[i], pick[j]);
                }
                ef1 += w * v1;
                ef2 += w * v2;
                return;
            }
            Rat cell_mass = 0;
            for (std::size_t idx : cells[level]) cell_mass += ex->masses[idx];
            for (std::size_t idx : cells[level]) {
                pick[level] = idx;
                recurse(level + 1, w * ex->masses[idx] / cell_mass);
            }
        };
        recurse(0, Rat(1));
        CHECK(ef1 == product_expectation_f1_exact(*ex, cells, indicator0));
        CHECK(ef2 == product_expectation_f2_exact(*ex, cells, rho));
    }
}

TEST_CASE("sampled expectations match exhaustive enumeration on a tiny partition") {
    auto p6 = make_space("path6");
    auto ex = p6->exact();
    REQUIRE(ex.has_value());
    std::vector<std::vector<std::size_t>> cells = {{0, 1, 2}, {3, 4, 5}};
    // enumerate E of the pair distance sum over the nine configurations
    Rat expect = 0;
    for (std::size_t a : cells[0])
        for (std::size_t b : cells[1]) expect += Rat(1, 9) * 2 * ex->dist[a][b];
    OmegaSampler sampler(finite_partition(p6, cells));
    Estimate mc = expectation_mc(sampler, default_xi(*p6), StatKind::Rho, 4000, 21);
    CHECK(std::abs(mc.value - to_double(expect)) <= 3.0 * mc.stderr_);
}

TEST_CASE("trial aggregates shrink like the square root of the trial count") {
    auto torus = make_space("torus2");
    auto xi = RadialMeasure::lebesgue(0.0, torus->diameter());
    OmegaSampler sampler(equal_measure_partition(torus, 4));
    TrialAggregate small = run_trials(sampler, xi, 64, 3, {64, 2});
    TrialAggregate big = run_trials(sampler, xi, 1024, 3, {64, 2});
    double ratio = small.rho_sum.stderr_ / big.rho_sum.stderr_;
    CHECK(ratio > 2.0);
    CHECK(ratio < 8.0);
}

TEST_CASE("trial runs are deterministic and thread-count independent") {
    auto torus = make_space("torus2");
    auto xi = RadialMeasure::lebesgue(0.0, torus->diameter());
    OmegaSampler sampler(equal_measure_partition(torus, 4));
    TrialAggregate a = run_trials(sampler, xi, 100, 7, {32, 1});
    TrialAggregate b = run_trials(sampler, xi, 100, 7, {32, 2});
    CHECK(a.lambda_xi.value == b.lambda_xi.value);
    CHECK(a.rho_sum.value == b.rho_sum.value);
}

TEST_CASE("probabilistic invariance holds on the circle with exact configs") {
    auto circle = make_space("circle");
    auto xi = RadialMeasure::lebesgue(0.0, 0.5);
    OmegaSampler sampler(equal_measure_partition(circle, 4));
    InvarianceReport rep = probabilistic_invariance_check(sampler, xi, 400, 5);
    CHECK(std::abs(rep.defect) <= 3.0 * rep.combined_se + 1e-9);
    REQUIRE(rep.exact_config_defect.has_value());
    CHECK(std::abs(*rep.exact_config_defect) < 1e-9);
    CHECK(rep.mode == "exact-config");
    // smoke: two trials still give a finite interval
    InvarianceReport tiny = probabilistic_invariance_check(sampler, xi, 2, 9);
    CHECK(std::isfinite(tiny.combined_se));
    CHECK_THROWS_AS(probabilistic_invariance_check(sampler, xi, 1, 9), std::invalid_argument);
}

TEST_CASE("bound report on circle arcs") {
    auto circle = make_space("circle");
    auto xi = RadialMeasure::lebesgue(0.0, 0.5);
    OmegaSampler sampler(equal_measure_partition(circle, 8));
    BoundReport rep = bound_report(sampler, xi, 300, 3);
    CHECK(rep.norm1 == doctest::Approx(0.125).epsilon(1e-12));
    CHECK(rep.rho_lower_bound == doctest::Approx(15.0).epsilon(1e-9));
    // equally spaced points achieve the distance sum 16
    CHECK(rep.rho_best >= 16.0 - 1e-9);
    CHECK(rep.rho_mc_mean.value >= rep.rho_lower_bound - 3.0 * rep.rho_mc_mean.stderr_);
    REQUIRE(rep.c0.has_value());
    CHECK(*rep.c0 == doctest::Approx(1.0));
    CHECK(rep.lambda_mc_mean.value <= *rep.lambda_upper_bound + 3.0 * rep.lambda_mc_mean.stderr_);
    // the a priori forms are looser than the measured-partition forms
    REQUIRE(rep.apriori_rho_lower.has_value());
    CHECK(*rep.apriori_rho_lower <= rep.rho_lower_bound + 1e-9);
    CHECK(rep.qn_rho.value <= rep.qn_bound + 3.0 * rep.qn_rho.stderr_);
    // the identity residual rides along in every report
    CHECK(std::abs(rep.invariance_defect) <= rep.invariance_ci + 1e-9);
}

TEST_CASE("bound report omits the kernel bound without a Lipschitz constant") {
    auto torus = make_space("torus2");
    OmegaSampler sampler(equal_measure_partition(torus, 4));
    auto atoms = RadialMeasure::atomic({0.3}, {1.0});
    BoundReport rep = bound_report(sampler, atoms, 50, 3);
    CHECK_FALSE(rep.c0.has_value());
    CHECK_FALSE(rep.lambda_upper_bound.has_value());
    CHECK(rep.rho_lower_bound > 0.0);
}

TEST_CASE("reports serialize with the envelope fields") {
    auto circle = make_space("circle");
    auto xi = RadialMeasure::lebesgue(0.0, 0.5);
    OmegaSampler sampler(equal_measure_partition(circle, 4));
    InvarianceReport rep = probabilistic_invariance_check(sampler, xi, 50, 5);
    Json j = record_envelope("invariance", 5, Json{{"space", "circle"}}, to_json(rep));
    CHECK(j["schema_version"] == 1);
    CHECK(j["seed"] == 5);
    CHECK(j["result"]["space"] == "circle");
    CHECK(j["result"].contains("defect"));
    std::string a = j.dump(), b = j.dump();
    CHECK(a == b);
}

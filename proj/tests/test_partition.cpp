#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "metricpoints/partition.hpp"

#include <cmath>

using namespace mps;

TEST_CASE("cdf inversion op") {
    PowerCdf identity(1.0);
    CHECK(inverse_cdf(identity, 0.25) == doctest::Approx(0.25).epsilon(1e-14));
    PowerCdf quad(2.0);
    CHECK(inverse_cdf(quad, 0.5) == doctest::Approx(0.7071067811865476).epsilon(1e-13));
    PiecewiseLinearCdf plateau({0.0, 0.4, 0.6, 1.0}, {0.0, 0.5, 0.5, 1.0});
    CHECK(inverse_cdf(plateau, 0.5) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK_THROWS_AS(inverse_cdf(identity, 1.5), std::out_of_range);
}

TEST_CASE("segment splitting") {
    PowerCdf uniform(1.0);
    SegmentPartition quartiles = split_segment(uniform, {1, 1, 1, 1}, 4);
    CHECK(quartiles.breakpoints == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
    for (double m : quartiles.masses) CHECK(m == doctest::Approx(0.25).epsilon(1e-13));

    PowerCdf quad(2.0);
    SegmentPartition halves = split_segment(quad, {1, 1}, 2);
    CHECK(halves.breakpoints[1] == doctest::Approx(0.7071067811865476).epsilon(1e-13));
    CHECK(halves.breakpoints[2] == doctest::Approx(1.0));
    CHECK(halves.masses[0] == doctest::Approx(0.5).epsilon(1e-12));

    // zero measure: first segment takes the whole interval, the rest are {1}
    ScaledCdf zero(std::make_shared<PowerCdf>(1.0), 0.0);
    SegmentPartition degenerate = split_segment(zero, {1, 1, 1}, 3);
    CHECK(degenerate.breakpoints == std::vector<double>{0.0, 1.0, 1.0, 1.0});

    CHECK_THROWS_AS(split_segment(uniform, {1, -1, 2}, 2), std::invalid_argument);
    CHECK_THROWS_AS(split_segment(uniform, {1, 1}, 3), std::invalid_argument);
}

TEST_CASE("zero-weight segments carry zero mass") {
    PowerCdf uniform(1.0);
    SegmentPartition part = split_segment(uniform, {2, 0, 1}, 3);
    CHECK(part.masses[1] == doctest::Approx(0.0));
    CHECK(part.breakpoints[1] == doctest::Approx(part.breakpoints[2]));
    double len = 0.0;
    for (std::size_t j = 0; j < part.segment_count(); ++j) len += part.length(j);
    CHECK(len == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("occupancy assignment") {
    Occupancy full = assign_occupancy(4, 2, OccupancyStrategy::Lexicographic);
    CHECK(full.k == 2);
    CHECK(full.labels == std::vector<std::uint8_t>{1, 1, 1, 1});

    Occupancy three = assign_occupancy(3, 2, OccupancyStrategy::Lexicographic);
    CHECK(three.k == 2);
    CHECK(three.labels == std::vector<std::uint8_t>{1, 1, 1, 0});

    Occupancy five = assign_occupancy(5, 2, OccupancyStrategy::Lexicographic);
    CHECK(five.k == 3);  // smallest k with k^2 >= 5
    long ones = 0;
    for (auto l : five.labels) ones += l;
    CHECK(ones == 5);

    Occupancy balanced = assign_occupancy(5, 2, OccupancyStrategy::Balanced);
    // per-slice counts along the first axis are as even as possible
    std::vector<long> slice(3, 0);
    for (int i = 0; i < 9; ++i) slice[i / 3] += balanced.labels[i];
    CHECK(slice == std::vector<long>{2, 2, 1});
}

TEST_CASE("box partition of the unit square") {
    auto nu = std::make_shared<CubeMeasure>(CubeMeasure::uniform(2));
    BoxPartition part = build_box_partition(nu, 4);
    CHECK(part.k == 2);
    REQUIRE(part.boxes.size() == 4);
    for (const auto& b : part.boxes) {
        CHECK(b.measure == doctest::Approx(0.25).epsilon(1e-12));
        CHECK(b.euclid_diameter == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
    }
    CHECK(part.avg_diameter() == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
    CHECK(part.avg_diameter() <= part.diameter_bound());
    CHECK(part.diameter_bound() == doctest::Approx(2.0));
}

TEST_CASE("one-dimensional thirds meet the bound without slack") {
    auto nu = std::make_shared<CubeMeasure>(CubeMeasure::uniform(1));
    BoxPartition part = build_box_partition(nu, 3);
    CHECK(part.avg_diameter() == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(part.diameter_bound() == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(part.avg_diameter() <= part.diameter_bound() + 1e-12);
}

TEST_CASE("product density splits at the marginal quantiles") {
    auto nu = std::make_shared<CubeMeasure>(CubeMeasure::named("product-4z1z2", 2));
    BoxPartition part = build_box_partition(nu, 4);
    for (const auto& b : part.boxes) CHECK(b.measure == doctest::Approx(0.25).epsilon(1e-10));
    // every axis splits at the square-root quantile
    for (const auto& node : part.levels[1])
        CHECK((node.hi[0] == doctest::Approx(0.7071067811865476).epsilon(1e-10) ||
               node.hi[0] == doctest::Approx(1.0)));
}

TEST_CASE("general densities reproduce their product counterparts") {
    // the nested-quadrature conditional path must agree with the exact
    // product factorization for a separable density
    auto gen = std::make_shared<CubeMeasure>(CubeMeasure::general(
        2, [](std::span<const double> z) { return 4.0 * z[0] * z[1]; }, "4z1z2"));
    auto prod = std::make_shared<CubeMeasure>(CubeMeasure::named("product-4z1z2", 2));
    BoxPartition a = build_box_partition(gen, 4);
    BoxPartition b = build_box_partition(prod, 4);
    for (std::size_t i = 0; i < a.boxes.size(); ++i) {
        CHECK(std::abs(a.boxes[i].measure - 0.25) <= 1e-6);
        for (int axis = 0; axis < 2; ++axis) {
            CHECK(a.boxes[i].lo[axis] == doctest::Approx(b.boxes[i].lo[axis]).epsilon(1e-6));
            CHECK(a.boxes[i].hi[axis] == doctest::Approx(b.boxes[i].hi[axis]).epsilon(1e-6));
        }
    }
}

TEST_CASE("level identities: lengths sum to one, masses track counts") {
    for (const char* density : {"uniform", "product-zsq"}) {
        for (int d : {1, 2, 3}) {
            auto nu = std::make_shared<CubeMeasure>(CubeMeasure::named(density, d));
            for (long n : {1L, 3L, 7L, 12L, 37L}) {
                BoxPartition part = build_box_partition(nu, n);
                for (int q = 0; q < d; ++q) {
                    for (std::size_t parent = 0; parent < part.levels[q].size(); ++parent) {
                        const auto& pnode = part.levels[q][parent];
                        double len = 0.0, mass = 0.0;
                        for (int i = 0; i < part.k; ++i) {
                            const auto& child = part.levels[q + 1][parent * part.k + i];
                            len += child.hi[q] - child.lo[q];
                            mass += child.mass;
                            CHECK(std::abs(child.mass - double(child.count) / double(n)) <=
                                  1e-9);
                        }
                        CHECK(len == doctest::Approx(1.0).epsilon(1e-12));
                        CHECK(mass == doctest::Approx(pnode.mass).epsilon(1e-11));
                    }
                }
            }
        }
    }
}

TEST_CASE("zero-count boxes split degenerately and stay empty") {
    auto nu = std::make_shared<CubeMeasure>(CubeMeasure::uniform(3));
    BoxPartition part = build_box_partition(nu, 3);  // k = 2, five of eight cells empty
    bool found = false;
    for (std::size_t parent = 0; parent < part.levels[2].size(); ++parent) {
        const auto& node = part.levels[2][parent];
        if (node.count != 0) continue;
        found = true;
        const auto& first = part.levels[3][parent * part.k + 0];
        const auto& second = part.levels[3][parent * part.k + 1];
        CHECK(first.lo[2] == doctest::Approx(0.0));
        CHECK(first.hi[2] == doctest::Approx(1.0));
        CHECK(second.lo[2] == doctest::Approx(1.0));
        CHECK(second.hi[2] == doctest::Approx(1.0));
        CHECK(first.mass == doctest::Approx(0.0));
        CHECK(second.mass == doctest::Approx(0.0));
    }
    CHECK(found);
}

TEST_CASE("average diameter bound over a sweep") {
    for (const char* density : {"uniform", "product-zsq"}) {
        for (int d : {1, 2, 3}) {
            auto nu = std::make_shared<CubeMeasure>(CubeMeasure::named(density, d));
            for (long n = 1; n <= 200; n += 7) {
                BoxPartition part = build_box_partition(nu, n);
                CHECK(part.avg_diameter() <= part.diameter_bound() + 1e-12);
                CHECK(part.boxes.size() == static_cast<std::size_t>(n));
            }
        }
    }
}

TEST_CASE("balanced occupancy also meets the bound") {
    auto nu = std::make_shared<CubeMeasure>(CubeMeasure::uniform(2));
    for (long n : {5L, 11L, 23L}) {
        BoxPartition part = build_box_partition(nu, n, OccupancyStrategy::Balanced);
        CHECK(part.boxes.size() == static_cast<std::size_t>(n));
        CHECK(part.avg_diameter() <= part.diameter_bound() + 1e-12);
        for (const auto& b : part.boxes)
            CHECK(b.measure == doctest::Approx(1.0 / double(n)).epsilon(1e-9));
    }
}

TEST_CASE("pushforward to the circle gives equal arcs") {
    auto circle = make_space("circle");
    SpacePartition part = equal_measure_partition(circle, 4);
    REQUIRE(part.size() == 4);
    for (const auto& cell : part.cells) {
        CHECK(cell.measure == doctest::Approx(0.25).epsilon(1e-12));
        CHECK(cell.diameter == doctest::Approx(0.25).epsilon(1e-12));
    }
    auto [avg, max] = diameters(part);
    CHECK(avg == doctest::Approx(0.25));
    CHECK(max == doctest::Approx(0.25));
    // a single cell is the whole circle: geodesic diameter 1/2, not 1
    SpacePartition whole = equal_measure_partition(circle, 1);
    CHECK(whole.cells[0].diameter == doctest::Approx(0.5));
}

TEST_CASE("pushforward to the torus respects the wrap-aware bound") {
    auto torus = make_space("torus2");
    SpacePartition part = equal_measure_partition(torus, 4);
    for (const auto& cell : part.cells)
        CHECK(cell.diameter == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
    CHECK(part.avg_diameter() <= std::sqrt(0.5) + 1e-12);
}

TEST_CASE("measured diameters on the sphere") {
    auto sphere = make_space("sphere2");
    // no global Lipschitz constant: the a priori mode must refuse
    CHECK_THROWS_AS(equal_measure_partition(sphere, 16), PreconditionError);
    SpacePartition part = equal_measure_partition(
        sphere, 100, OccupancyStrategy::Lexicographic, DiameterMode::MeasuredSampling,
        PushforwardOpts{64, 5});
    CHECK(part.size() == 100);
    for (const auto& cell : part.cells) {
        CHECK(cell.measure == doctest::Approx(0.01).epsilon(1e-9));
        CHECK(cell.diameter > 0.0);
        CHECK(cell.diameter <= M_PI);
    }
    // sampled diameters are lower estimates but should be near the cell scale
    CHECK(part.avg_diameter() > 0.1);
    CHECK(part.avg_diameter() < 1.0);
}

TEST_CASE("pushforward validates the measure pairing") {
    auto circle = make_space("circle");
    auto wrong = std::make_shared<CubeMeasure>(CubeMeasure::named("product-zsq", 1));
    BoxPartition boxes = build_box_partition(wrong, 4);
    CHECK_THROWS_AS(pushforward_partition(circle, boxes, DiameterMode::LipschitzBound),
                    std::invalid_argument);
}

TEST_CASE("finite partitions carry exact measures and diameters") {
    auto p6 = make_space("path6");
    SpacePartition part = finite_partition(p6, {{0, 1, 2}, {3, 4, 5}});
    CHECK(part.cells[0].measure == doctest::Approx(0.5));
    CHECK(part.cells[0].diameter == doctest::Approx(0.4));
    CHECK_THROWS_AS(finite_partition(p6, {{0, 1}, {1, 2, 3, 4, 5}}), std::invalid_argument);
    CHECK_THROWS_AS(finite_partition(p6, {{0, 1, 2}}), std::invalid_argument);
}

TEST_CASE("diameter summary of mixed cells") {
    SpacePartition part;
    part.space = make_space("circle");
    SpaceCell a, b;
    a.diameter = 0.1;
    b.diameter = 0.3;
    a.measure = b.measure = 0.5;
    part.cells = {a, b};
    auto [avg, max] = diameters(part);
    CHECK(avg == doctest::Approx(0.2));
    CHECK(max == doctest::Approx(0.3));
}

TEST_CASE("scaling of the average diameter with the cell count") {
    for (int d : {2, 3}) {
        auto nu = std::make_shared<CubeMeasure>(CubeMeasure::uniform(d));
        std::vector<double> logn, logd;
        for (long n = 8; n <= 1024; n *= 2) {
            BoxPartition part = build_box_partition(nu, n);
            logn.push_back(std::log(double(n)));
            logd.push_back(std::log(part.avg_diameter()));
        }
        double slope = regression_slope(logn, logd);
        CHECK(slope == doctest::Approx(-1.0 / d).epsilon(0.1 * d));
    }
}

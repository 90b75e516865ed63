#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "metricpoints/core.hpp"

#include <atomic>
#include <cmath>

using namespace mps;

TEST_CASE("gauss rules integrate polynomials of matching degree exactly") {
    // order n is exact through degree 2n-1
    auto f = [](double x) { return 5.0 * x * x * x * x * x * x * x - 3.0 * x * x + 1.0; };
    double exact = 5.0 / 8.0 - 1.0 + 1.0;  // over [0,1]
    CHECK(integrate_gauss(f, 0.0, 1.0, 4) == doctest::Approx(exact).epsilon(1e-14));
    CHECK(integrate_gauss([](double x) { return x * x; }, 0.0, 2.0, 2) ==
          doctest::Approx(8.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("segment integration splits at breakpoints") {
    auto f = [](double x) { return std::abs(x - 0.3) + std::abs(x - 0.7); };
    double exact = 0.09 + 0.245 + 0.245 + 0.045 + 0.045 + 0.09 + 0.4 * 0.4;
    // direct piecewise evaluation: integral of |x-.3| is .045+.245, of |x-.7| is .245+.045
    exact = (0.045 + 0.245) + (0.245 + 0.045);
    double got = integrate_segments(f, 0.0, 1.0, {0.3, 0.7}, 4);
    CHECK(got == doctest::Approx(exact).epsilon(1e-13));
    // breakpoints outside the range are ignored
    CHECK(integrate_segments(f, 0.0, 1.0, {-1.0, 0.3, 0.7, 2.0}, 4) ==
          doctest::Approx(exact).epsilon(1e-13));
}

TEST_CASE("adaptive integration reaches the requested tolerance") {
    double got = integrate_adaptive([](double x) { return std::sqrt(x); }, 0.0, 1.0, 1e-11);
    CHECK(got == doctest::Approx(2.0 / 3.0).epsilon(1e-8));
}

TEST_CASE("rng streams are deterministic and substreams differ") {
    RngStream a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    RngStream s0 = RngStream::substream(7, 0);
    RngStream s1 = RngStream::substream(7, 1);
    CHECK(s0.next_u64() != s1.next_u64());
    RngStream u(3);
    double mean = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) mean += u.uniform();
    mean /= n;
    CHECK(std::abs(mean - 0.5) < 3.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST_CASE("compensated summation survives cancellation") {
    CompensatedSum s;
    s.add(1e16);
    s.add(1.0);
    s.add(-1e16);
    CHECK(s.value() == 1.0);
}

TEST_CASE("running stats match closed forms") {
    RunningStats st;
    for (double v : {1.0, 2.0, 3.0, 4.0}) st.add(v);
    CHECK(st.mean() == doctest::Approx(2.5));
    CHECK(st.sample_variance() == doctest::Approx(5.0 / 3.0));
    CHECK(st.stderr_of_mean() == doctest::Approx(std::sqrt(5.0 / 12.0)));
}

TEST_CASE("regression slope on exact line") {
    std::vector<double> x = {1, 2, 3, 4}, y = {3, 5, 7, 9};
    CHECK(regression_slope(x, y) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK_THROWS_AS(regression_slope({1.0}, {2.0}), std::invalid_argument);
}

TEST_CASE("parallel_for covers the range once and propagates errors") {
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) CHECK(h == 1);
    CHECK_THROWS_AS(
        parallel_for(8, 2, [](std::size_t i) {
            if (i == 5) throw std::runtime_error("boom");
        }),
        std::runtime_error);
}

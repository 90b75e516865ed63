#include "metricpoints/discrepancy.hpp"

#include <algorithm>
#include <cmath>

namespace mps {

namespace {

double frac(double x) {
    double f = x - std::floor(x);
    return f == 1.0 ? 0.0 : f;
}

long count_le(const std::vector<double>& sorted, double r) {
    return static_cast<long>(std::upper_bound(sorted.begin(), sorted.end(), r) - sorted.begin());
}

/// Inner radial integral for one center y: the squared deviation
/// (count(r) - N v(y,r))^2 integrated against xi.  The count is a step
/// function of r jumping at the sorted distances, and v(y,.) is smooth
/// between the space's volume breakpoints, so a per-segment Gauss rule is
/// accurate to rounding.
double lambda_inner(const Space& space, const RadialMeasure& xi, const Point& y,
                    const std::vector<double>& dists_sorted) {
    const double L = space.diameter();
    const double n = static_cast<double>(dists_sorted.size());
    auto volume = [&](double r) {
        return space.ball_volume(y, std::clamp(r, 0.0, L)).value;
    };
    if (xi.kind() == RadialMeasure::Kind::Atomic) {
        CompensatedSum acc;
        const auto& radii = xi.atom_radii();
        const auto& weights = xi.atom_weights();
        for (std::size_t a = 0; a < radii.size(); ++a) {
            if (weights[a] <= 0.0) continue;
            double dev = static_cast<double>(count_le(dists_sorted, radii[a])) -
                         n * volume(radii[a]);
            acc.add(weights[a] * dev * dev);
        }
        return acc.value();
    }
    const double lo = xi.lebesgue_lo(), hi = std::min(xi.lebesgue_hi(), L);
    if (hi <= lo) return 0.0;
    std::vector<double> brk = dists_sorted;
    for (double b : space.volume_breakpoints(y)) brk.push_back(b);
    brk.push_back(lo);
    brk.push_back(hi);
    std::sort(brk.begin(), brk.end());
    const GaussRule& rule = gauss_rule(4);
    CompensatedSum acc;
    double prev = lo;
    for (double b : brk) {
        double a = std::max(prev, lo), bb = std::min(b, hi);
        if (bb > a) {
            double c = static_cast<double>(count_le(dists_sorted, 0.5 * (a + bb)));
            double mid = 0.5 * (a + bb), half = 0.5 * (bb - a);
            double piece = 0.0;
            for (std::size_t g = 0; g < rule.nodes.size(); ++g) {
                double dev = c - n * volume(mid + half * rule.nodes[g]);
                piece += rule.weights[g] * dev * dev;
            }
            acc.add(half * piece);
        }
        prev = std::max(prev, bb);
        if (prev >= hi) break;
    }
    if (prev < hi) {
        double c = static_cast<double>(count_le(dists_sorted, 0.5 * (prev + hi)));
        double mid = 0.5 * (prev + hi), half = 0.5 * (hi - prev);
        double piece = 0.0;
        for (std::size_t g = 0; g < rule.nodes.size(); ++g) {
            double dev = c - n * volume(mid + half * rule.nodes[g]);
            piece += rule.weights[g] * dev * dev;
        }
        acc.add(half * piece);
    }
    return acc.value();
}

/// Off-diagonal pair sum of |sigma(rho_i) - sigma(rho_j)| given the sorted
/// distances from one center; sigma is non-increasing so the sorted order
/// makes the double sum a single weighted pass.
double sigma_pair_sum(const RadialMeasure& xi, const std::vector<double>& dists_sorted) {
    const std::size_t n = dists_sorted.size();
    CompensatedSum acc;
    // sigma descending along ascending distances
    for (std::size_t k = 0; k < n; ++k) {
        double s = xi.sigma(dists_sorted[k]);
        acc.add(s * (static_cast<double>(n) - 1.0 - 2.0 * static_cast<double>(k)));
    }
    return 2.0 * acc.value();
}

}  // namespace

// ---------------------------------------------------------------------------
// Circle backends
// ---------------------------------------------------------------------------

double circle_lambda_r_exact(const std::vector<double>& xs, double r) {
    const std::size_t n = xs.size();
    if (r >= 0.5) return 0.0;  // every arc is the whole circle
    if (r < 0.0) throw std::out_of_range("circle_lambda_r_exact: negative radius");
    const double v = 2.0 * r;
    const double expect = static_cast<double>(n) * v;
    // sweep events: arcs [x-r, x+r] enter/exit as the center moves
    std::vector<std::pair<double, int>> events;
    events.reserve(2 * n);
    long c0 = 0;
    for (double x : xs) {
        double lo = frac(x - r), hi = frac(x + r);
        events.emplace_back(lo, +1);
        events.emplace_back(hi, -1);
        double d = std::abs(x - 0.0);
        if (std::min(d, 1.0 - d) <= r) ++c0;
    }
    std::sort(events.begin(), events.end());
    CompensatedSum acc;
    double prev = 0.0;
    long c = c0;
    for (const auto& [pos, delta] : events) {
        double dev = static_cast<double>(c) - expect;
        acc.add((pos - prev) * dev * dev);
        // the count at the event position itself spans a null set
        c += delta;
        prev = pos;
    }
    double dev = static_cast<double>(c) - expect;
    acc.add((1.0 - prev) * dev * dev);
    return acc.value();
}

double circle_lambda_xi_exact(const std::vector<double>& xs, const RadialMeasure& xi) {
    if (xi.kind() == RadialMeasure::Kind::Atomic) {
        CompensatedSum acc;
        for (std::size_t a = 0; a < xi.atom_radii().size(); ++a)
            if (xi.atom_weights()[a] > 0.0)
                acc.add(xi.atom_weights()[a] * circle_lambda_r_exact(xs, xi.atom_radii()[a]));
        return acc.value();
    }
    double lo = xi.lebesgue_lo(), hi = std::min(xi.lebesgue_hi(), 0.5);
    if (hi <= lo) return 0.0;
    // knots: radii where two arc endpoints meet on the circle
    std::vector<double> knots = {0.5};
    for (double a : xs)
        for (double b : xs) knots.push_back(0.5 * frac(a - b));
    return integrate_segments([&](double r) { return circle_lambda_r_exact(xs, r); }, lo, hi,
                              std::move(knots), 4);
}

namespace {

double circle_rho_star_r(double t, double r) {
    return 4.0 * r - 2.0 * std::max(0.0, 2.0 * r - t) - 2.0 * std::max(0.0, 2.0 * r - (1.0 - t));
}

}  // namespace

double circle_rho_star_xi_exact(double t, const RadialMeasure& xi) {
    if (xi.kind() == RadialMeasure::Kind::Atomic) {
        CompensatedSum acc;
        for (std::size_t a = 0; a < xi.atom_radii().size(); ++a)
            acc.add(xi.atom_weights()[a] * circle_rho_star_r(t, xi.atom_radii()[a]));
        return acc.value();
    }
    double lo = xi.lebesgue_lo(), hi = std::min(xi.lebesgue_hi(), 0.5);
    return integrate_segments([&](double r) { return circle_rho_star_r(t, r); }, lo, hi,
                              {0.5 * t, 0.5 * (1.0 - t)}, 4);
}

double circle_mean_rho_star_xi_exact(const RadialMeasure& xi) {
    auto g = [](double r) {
        double v = std::min(2.0 * r, 1.0);
        return 2.0 * (v - v * v);
    };
    if (xi.kind() == RadialMeasure::Kind::Atomic) {
        CompensatedSum acc;
        for (std::size_t a = 0; a < xi.atom_radii().size(); ++a)
            acc.add(xi.atom_weights()[a] * g(xi.atom_radii()[a]));
        return acc.value();
    }
    double lo = xi.lebesgue_lo(), hi = std::min(xi.lebesgue_hi(), 0.5);
    return integrate_segments(g, lo, hi, {}, 4);
}

// ---------------------------------------------------------------------------
// Configuration statistics
// ---------------------------------------------------------------------------

ConfigStats config_stats_mc(const Space& space, const RadialMeasure& xi,
                            const std::vector<Point>& points, long y_samples, RngStream& rng) {
    const std::size_t n = points.size();
    ConfigStats out;
    CompensatedSum rho;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) rho.add(space.metric(points[i], points[j]));
    out.rho_sum = 2.0 * rho.value();

    CompensatedSum lam, pairs;
    std::vector<double> dists(n);
    for (long s = 0; s < y_samples; ++s) {
        Point y = space.sample(rng);
        for (std::size_t i = 0; i < n; ++i) dists[i] = space.metric(points[i], y);
        std::sort(dists.begin(), dists.end());
        lam.add(lambda_inner(space, xi, y, dists));
        pairs.add(sigma_pair_sum(xi, dists));
    }
    out.lambda_xi = lam.value() / static_cast<double>(y_samples);
    out.rho_star_sum = pairs.value() / static_cast<double>(y_samples);
    return out;
}

ConfigStats circle_config_stats(const Space& circle, const RadialMeasure& xi,
                                const std::vector<Point>& points) {
    std::vector<double> xs;
    xs.reserve(points.size());
    for (const auto& p : points) xs.push_back(p[0]);
    ConfigStats out;
    out.lambda_xi = circle_lambda_xi_exact(xs, xi);
    CompensatedSum rho, star;
    for (std::size_t i = 0; i < xs.size(); ++i)
        for (std::size_t j = i + 1; j < xs.size(); ++j) {
            double t = circle.metric(points[i], points[j]);
            rho.add(t);
            star.add(circle_rho_star_xi_exact(t, xi));
        }
    out.rho_sum = 2.0 * rho.value();
    out.rho_star_sum = 2.0 * star.value();
    return out;
}

// ---------------------------------------------------------------------------
// Public operations
// ---------------------------------------------------------------------------

double sum_distances(const Space& space, const PointSet& pts) {
    if (pts.size() < 1) throw std::invalid_argument("sum_distances: empty point set");
    CompensatedSum acc;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j)
            acc.add(space.metric(pts.points[i], pts.points[j]));
    return 2.0 * acc.value();
}

double local_discrepancy(const Space& space, const PointSet& pts, const Point& y, double r,
                         const DiscrepancyOpts& opts) {
    long count = 0;
    for (const auto& x : pts.points)
        if (space.metric(x, y) <= r) ++count;
    BallVolumeOpts vopts{opts.samples, opts.seed};
    return static_cast<double>(count) -
           static_cast<double>(pts.size()) * space.ball_volume(y, r, vopts).value;
}

Estimate l2_discrepancy_r(const Space& space, const PointSet& pts, double r, L2Mode mode,
                          const DiscrepancyOpts& opts) {
    if (r < -1e-12 || r > space.diameter() + 1e-12)
        throw std::out_of_range("l2_discrepancy_r: radius outside [0, diameter]");
    const double n = static_cast<double>(pts.size());
    if (mode == L2Mode::Integral) {
        if (space.finite()) {
            CompensatedSum acc;
            for (std::size_t yi = 0; yi < space.point_count(); ++yi) {
                Point y = space.point_at(yi);
                long count = 0;
                for (const auto& x : pts.points)
                    if (space.metric(x, y) <= r + 1e-12) ++count;
                double dev = count - n * space.ball_volume(y, r).value;
                acc.add(space.point_mass(yi) * dev * dev);
            }
            return {acc.value(), 0.0, "exact"};
        }
        if (space.name() == "circle") {
            std::vector<double> xs;
            for (const auto& p : pts.points) xs.push_back(p[0]);
            return {circle_lambda_r_exact(xs, r), 0.0, "piecewise"};
        }
        RngStream rng(opts.seed);
        RunningStats stats;
        for (long s = 0; s < opts.samples; ++s) {
            Point y = space.sample(rng);
            long count = 0;
            for (const auto& x : pts.points)
                if (space.metric(x, y) <= r) ++count;
            double dev = count - n * space.ball_volume(y, r).value;
            stats.add(dev * dev);
        }
        return {stats.mean(), stats.stderr_of_mean(), "mc"};
    }
    // kernel mode
    KernelComponents kc = kernel_components(space, r, opts);
    CompensatedSum a1sum;
    double a1_var = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        Estimate e = kc.a1(pts.points[i]);
        a1sum.add(e.value);
        a1_var += e.stderr_ * e.stderr_;
    }
    CompensatedSum starsum;
    double star_var = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            DiscrepancyOpts popts = opts;
            popts.seed = opts.seed + 7919 * (i * pts.size() + j + 1);
            Estimate e = symdiff_metric_r(space, pts.points[i], pts.points[j], r, popts);
            starsum.add(e.value);
            star_var += e.stderr_ * e.stderr_;
        }
    double value = 0.5 * (n * n * kc.a0.value + 2.0 * n * a1sum.value() - 2.0 * starsum.value());
    double var = 0.25 * (std::pow(n * n * kc.a0.stderr_, 2) + 4.0 * n * n * a1_var +
                         4.0 * star_var);
    std::string method = kc.a0.stderr_ == 0.0 && var == 0.0 ? "kernel-exact" : "kernel-mc";
    return {value, std::sqrt(var), method};
}

Estimate l2_discrepancy_xi(const Space& space, const PointSet& pts, const RadialMeasure& xi,
                           const DiscrepancyOpts& opts) {
    if (space.name() == "circle") {
        std::vector<double> xs;
        for (const auto& p : pts.points) xs.push_back(p[0]);
        return {circle_lambda_xi_exact(xs, xi), 0.0, "piecewise"};
    }
    if (space.finite()) {
        auto lambda_r = [&](double r) {
            return l2_discrepancy_r(space, pts, r, L2Mode::Integral).value;
        };
        if (xi.kind() == RadialMeasure::Kind::Atomic) {
            CompensatedSum acc;
            for (std::size_t a = 0; a < xi.atom_radii().size(); ++a)
                if (xi.atom_weights()[a] > 0.0)
                    acc.add(xi.atom_weights()[a] * lambda_r(xi.atom_radii()[a]));
            return {acc.value(), 0.0, "exact"};
        }
        double v = xi.integrate(lambda_r, space.radii_set(), 8);
        return {v, 0.0, "quadrature"};
    }
    RngStream rng(opts.seed);
    RunningStats stats;
    std::vector<double> dists(pts.size());
    for (long s = 0; s < opts.samples; ++s) {
        Point y = space.sample(rng);
        for (std::size_t i = 0; i < pts.size(); ++i) dists[i] = space.metric(pts.points[i], y);
        std::sort(dists.begin(), dists.end());
        stats.add(lambda_inner(space, xi, y, dists));
    }
    return {stats.mean(), stats.stderr_of_mean(), "mc"};
}

Estimate symdiff_metric_r(const Space& space, const Point& y1, const Point& y2, double r,
                          const DiscrepancyOpts& opts) {
    if (r < -1e-12 || r > space.diameter() + 1e-12)
        throw std::out_of_range("symdiff_metric_r: radius outside [0, diameter]");
    space.validate_point(y1);
    space.validate_point(y2);
    if (space.finite()) {
        CompensatedSum acc;
        for (std::size_t i = 0; i < space.point_count(); ++i) {
            Point y = space.point_at(i);
            bool in1 = space.metric(y1, y) <= r + 1e-12;
            bool in2 = space.metric(y2, y) <= r + 1e-12;
            if (in1 != in2) acc.add(space.point_mass(i));
        }
        return {acc.value(), 0.0, "exact"};
    }
    if (auto closed = space.symdiff_r_closed(y1, y2, r)) return {*closed, 0.0, "closed-form"};
    RngStream rng(opts.seed);
    long hits = 0;
    for (long s = 0; s < opts.samples; ++s) {
        Point y = space.sample(rng);
        if ((space.metric(y1, y) <= r) != (space.metric(y2, y) <= r)) ++hits;
    }
    double p = static_cast<double>(hits) / static_cast<double>(opts.samples);
    double se = std::sqrt(std::max(p * (1.0 - p), 1.0 / opts.samples) / opts.samples);
    return {p, se, "mc"};
}

Estimate symdiff_metric_xi(const Space& space, const RadialMeasure& xi, const Point& y1,
                           const Point& y2, SymdiffMode mode, const DiscrepancyOpts& opts) {
    space.validate_point(y1);
    space.validate_point(y2);
    const double L = space.diameter();
    if (mode == SymdiffMode::Direct) {
        if (xi.kind() == RadialMeasure::Kind::Atomic) {
            CompensatedSum acc;
            double var = 0.0;
            bool exact = true;
            for (std::size_t a = 0; a < xi.atom_radii().size(); ++a) {
                DiscrepancyOpts aopts = opts;
                aopts.seed = opts.seed + a + 1;
                Estimate e = symdiff_metric_r(space, y1, y2, xi.atom_radii()[a], aopts);
                acc.add(xi.atom_weights()[a] * e.value);
                var += std::pow(xi.atom_weights()[a] * e.stderr_, 2);
                exact &= e.stderr_ == 0.0;
            }
            return {acc.value(), std::sqrt(var), exact ? "exact" : "mc"};
        }
        double lo = xi.lebesgue_lo(), hi = std::min(xi.lebesgue_hi(), L);
        std::vector<double> hints = space.symdiff_breakpoints(y1, y2);
        const GaussRule& rule = gauss_rule(16);
        std::vector<double> cuts = hints;
        cuts.push_back(lo);
        cuts.push_back(hi);
        std::sort(cuts.begin(), cuts.end());
        CompensatedSum acc;
        double var = 0.0;
        double prev = lo;
        long node_id = 0;
        bool deterministic = true;
        auto add_piece = [&](double a, double b) {
            double mid = 0.5 * (a + b), half = 0.5 * (b - a);
            for (std::size_t g = 0; g < rule.nodes.size(); ++g) {
                DiscrepancyOpts nopts = opts;
                nopts.samples = std::max(1000L, opts.samples / 16);
                nopts.seed = opts.seed + 131 * (++node_id);
                Estimate e =
                    symdiff_metric_r(space, y1, y2, mid + half * rule.nodes[g], nopts);
                double w = half * rule.weights[g];
                acc.add(w * e.value);
                var += std::pow(w * e.stderr_, 2);
                deterministic &= e.stderr_ == 0.0;
            }
        };
        for (double c : cuts) {
            double b = std::min(c, hi);
            if (b > prev && prev >= lo) add_piece(prev, b);
            prev = std::max(prev, b);
            if (prev >= hi) break;
        }
        if (prev < hi) add_piece(prev, hi);
        return {acc.value(), std::sqrt(var), deterministic ? "quadrature" : "quadrature+mc"};
    }
    // sigma form
    if (space.finite()) {
        CompensatedSum acc;
        for (std::size_t i = 0; i < space.point_count(); ++i) {
            Point y = space.point_at(i);
            acc.add(space.point_mass(i) *
                    std::abs(xi.sigma(space.metric(y1, y)) - xi.sigma(space.metric(y2, y))));
        }
        return {acc.value(), 0.0, "exact"};
    }
    if (space.name() == "circle") {
        double a = y1[0], b = y2[0];
        std::vector<double> hints = {a, b, frac(a + 0.5), frac(b + 0.5), frac(0.5 * (a + b)),
                                     frac(0.5 * (a + b) + 0.5)};
        if (xi.kind() == RadialMeasure::Kind::Atomic)
            for (double atom : xi.atom_radii())
                for (double c : {a, b}) {
                    hints.push_back(frac(c + atom));
                    hints.push_back(frac(c - atom));
                }
        auto f = [&](double u) {
            double d1 = std::abs(u - a);
            d1 = std::min(d1, 1.0 - d1);
            double d2 = std::abs(u - b);
            d2 = std::min(d2, 1.0 - d2);
            return std::abs(xi.sigma(d1) - xi.sigma(d2));
        };
        return {integrate_segments(f, 0.0, 1.0, hints, 8), 0.0, "piecewise"};
    }
    RngStream rng(opts.seed);
    RunningStats stats;
    for (long s = 0; s < opts.samples; ++s) {
        Point y = space.sample(rng);
        stats.add(std::abs(xi.sigma(space.metric(y1, y)) - xi.sigma(space.metric(y2, y))));
    }
    return {stats.mean(), stats.stderr_of_mean(), "mc"};
}

Estimate mean_rho_star_xi(const Space& space, const RadialMeasure& xi,
                          const DiscrepancyOpts& opts) {
    const double L = space.diameter();
    if (space.finite()) {
        auto g = [&](double r) {
            CompensatedSum acc;
            for (std::size_t i = 0; i < space.point_count(); ++i) {
                double v = space.ball_volume(space.point_at(i), std::clamp(r, 0.0, L)).value;
                acc.add(space.point_mass(i) * 2.0 * (v - v * v));
            }
            return acc.value();
        };
        return {xi.integrate(g, space.radii_set(), 8), 0.0, "exact"};
    }
    if (space.distance_invariant()) {
        Point y0 = canonical_point(space);
        auto g = [&](double r) {
            double v = space.ball_volume(y0, std::clamp(r, 0.0, L)).value;
            return 2.0 * (v - v * v);
        };
        return {xi.integrate(g, space.volume_breakpoints(y0), 32), 0.0, "quadrature"};
    }
    // center-dependent volumes: Monte Carlo over centers with an exact
    // radial quadrature per center
    RngStream rng(opts.seed);
    RunningStats stats;
    for (long s = 0; s < opts.samples; ++s) {
        Point y = space.sample(rng);
        auto g = [&](double r) {
            double v = space.ball_volume(y, std::clamp(r, 0.0, L)).value;
            return 2.0 * (v - v * v);
        };
        stats.add(xi.integrate(g, space.volume_breakpoints(y), 8));
    }
    return {stats.mean(), stats.stderr_of_mean(), "mc"};
}

KernelComponents kernel_components(const Space& space, double r, const DiscrepancyOpts& opts) {
    if (r < -1e-12 || r > space.diameter() + 1e-12)
        throw std::out_of_range("kernel_components: radius outside [0, diameter]");
    KernelComponents kc;
    if (space.distance_invariant()) {
        double v = space.ball_volume(canonical_point(space), r).value;
        kc.a0 = {2.0 * v * v, 0.0, "closed-form"};
        kc.a1 = [v](const Point&) { return Estimate{v - 2.0 * v * v, 0.0, "closed-form"}; };
        return kc;
    }
    if (space.finite()) {
        CompensatedSum a0;
        for (std::size_t i = 0; i < space.point_count(); ++i) {
            double v = space.ball_volume(space.point_at(i), r).value;
            a0.add(space.point_mass(i) * v * v);
        }
        kc.a0 = {2.0 * a0.value(), 0.0, "exact"};
        auto spacePtr = &space;
        kc.a1 = [spacePtr, r](const Point& x) {
            CompensatedSum acc;
            for (std::size_t i = 0; i < spacePtr->point_count(); ++i) {
                Point y = spacePtr->point_at(i);
                double v = spacePtr->ball_volume(y, r).value;
                if (spacePtr->metric(x, y) <= r + 1e-12) acc.add(spacePtr->point_mass(i) * v);
            }
            double vx = spacePtr->ball_volume(x, r).value;
            return Estimate{vx - 2.0 * acc.value(), 0.0, "exact"};
        };
        return kc;
    }
    {
        RngStream rng(opts.seed);
        RunningStats stats;
        for (long s = 0; s < opts.samples; ++s) {
            double v = space.ball_volume(space.sample(rng), r).value;
            stats.add(2.0 * v * v);
        }
        kc.a0 = {stats.mean(), stats.stderr_of_mean(), "mc"};
    }
    auto spacePtr = &space;
    long samples = opts.samples;
    std::uint64_t seed = opts.seed;
    kc.a1 = [spacePtr, r, samples, seed](const Point& x) {
        RngStream rng(seed ^ 0x41b3u);
        RunningStats stats;
        for (long s = 0; s < samples; ++s) {
            Point y = spacePtr->sample(rng);
            double v = spacePtr->ball_volume(y, r).value;
            stats.add(spacePtr->metric(x, y) <= r ? v : 0.0);
        }
        double vx = spacePtr->ball_volume(x, r).value;
        return Estimate{vx - 2.0 * stats.mean(), 2.0 * stats.stderr_of_mean(), "mc"};
    };
    return kc;
}

LipschitzCheck lipschitz_check_rho_star(const Space& space, const RadialMeasure& xi, long pairs,
                                        std::uint64_t seed, const DiscrepancyOpts& opts) {
    auto c0 = xi.c0(space.radii_set());
    if (!c0)
        throw UnsupportedError("lipschitz_check_rho_star: xi carries no Lipschitz constant here");
    LipschitzCheck out;
    out.c0 = *c0;
    out.pairs = pairs;
    RngStream rng(seed);
    const bool circle = space.name() == "circle";
    for (long p = 0; p < pairs; ++p) {
        Point y1 = space.sample(rng);
        Point y2 = space.sample(rng);
        double t = space.metric(y1, y2);
        if (t <= 0.0) continue;  // coincident pair: ratio defined as 0
        double value;
        if (circle) {
            value = circle_rho_star_xi_exact(t, xi);
        } else if (space.finite()) {
            value = symdiff_metric_xi(space, xi, y1, y2, SymdiffMode::SigmaForm).value;
        } else {
            DiscrepancyOpts popts = opts;
            popts.seed = seed + 977 * (p + 1);
            value = symdiff_metric_xi(space, xi, y1, y2, SymdiffMode::SigmaForm, popts).value;
        }
        out.max_ratio = std::max(out.max_ratio, value / t);
    }
    return out;
}

DiscrepancyReport compute_discrepancy_report(const Space& space, const PointSet& pts,
                                             const RadialMeasure& xi,
                                             const DiscrepancyOpts& opts) {
    DiscrepancyReport rep;
    rep.space_name = space.name();
    rep.xi_description = xi.description();
    rep.n = pts.size();
    rep.seed = opts.seed;
    rep.rho_sum = sum_distances(space, pts);
    rep.lambda_xi = l2_discrepancy_xi(space, pts, xi, opts);
    rep.mean_rho = mean_distance(space, {MeanDistanceOpts::Mode::Auto, opts.samples, opts.seed});
    rep.mean_rho_star = mean_rho_star_xi(space, xi, opts);

    if (space.name() == "circle") {
        CompensatedSum acc;
        for (std::size_t i = 0; i < pts.size(); ++i)
            for (std::size_t j = i + 1; j < pts.size(); ++j)
                acc.add(circle_rho_star_xi_exact(space.metric(pts.points[i], pts.points[j]), xi));
        rep.rho_star_sum = {2.0 * acc.value(), 0.0, "piecewise"};
    } else if (space.finite()) {
        CompensatedSum acc;
        for (std::size_t i = 0; i < pts.size(); ++i)
            for (std::size_t j = i + 1; j < pts.size(); ++j)
                acc.add(symdiff_metric_xi(space, xi, pts.points[i], pts.points[j],
                                          SymdiffMode::SigmaForm)
                            .value);
        rep.rho_star_sum = {2.0 * acc.value(), 0.0, "exact"};
    } else {
        // shared-center estimator of the pair sum
        RngStream rng(opts.seed + 17);
        RunningStats stats;
        std::vector<double> dists(pts.size());
        long samples = std::max(1000L, opts.samples / 10);
        for (long s = 0; s < samples; ++s) {
            Point y = space.sample(rng);
            for (std::size_t i = 0; i < pts.size(); ++i)
                dists[i] = space.metric(pts.points[i], y);
            std::sort(dists.begin(), dists.end());
            stats.add(sigma_pair_sum(xi, dists));
        }
        rep.rho_star_sum = {stats.mean(), stats.stderr_of_mean(), "mc"};
    }
    return rep;
}

}  // namespace mps

#include "metricpoints/invariance.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace mps {

// ---------------------------------------------------------------------------
// Distance invariance
// ---------------------------------------------------------------------------

DistanceInvarianceCheck check_distance_invariance(const Space& space, int radii_grid,
                                                  int centers, std::uint64_t seed,
                                                  long samples) {
    DistanceInvarianceCheck out;
    if (space.finite()) {
        double dev = 0.0;
        for (double r : space.radii_set()) {
            double v0 = space.ball_volume(space.point_at(0), r).value;
            for (std::size_t y = 1; y < space.point_count(); ++y)
                dev = std::max(dev, std::abs(space.ball_volume(space.point_at(y), r).value - v0));
        }
        out.max_deviation = dev;
        out.tolerance = 0.0;
        out.invariant = dev == 0.0;
        return out;
    }
    // Monte Carlo membership counts: an independent route even on spaces
    // whose registered volume formula ignores the center.
    RngStream rng(seed);
    std::vector<Point> ys;
    for (int c = 0; c < centers; ++c) ys.push_back(space.sample(rng));
    const double L = space.diameter();
    double dev = 0.0;
    double se_pair = std::sqrt(0.5 / static_cast<double>(samples));  // worst-case p=1/2, two estimates
    for (int g = 1; g <= radii_grid; ++g) {
        double r = L * static_cast<double>(g) / static_cast<double>(radii_grid + 1);
        std::vector<double> vols;
        for (const auto& y : ys) {
            long hits = 0;
            for (long s = 0; s < samples; ++s)
                if (space.metric(y, space.sample(rng)) <= r) ++hits;
            vols.push_back(static_cast<double>(hits) / static_cast<double>(samples));
        }
        auto [mn, mx] = std::minmax_element(vols.begin(), vols.end());
        dev = std::max(dev, *mx - *mn);
    }
    out.max_deviation = dev;
    out.tolerance = 6.0 * se_pair;
    out.invariant = dev <= out.tolerance;
    return out;
}

// ---------------------------------------------------------------------------
// Exact finite engine
// ---------------------------------------------------------------------------

RationalRadialMeasure exact_uniform_xi(const ExactFiniteSpace& space) {
    return RationalRadialMeasure::uniform_atomic(space.radii);
}

Rat ExactFiniteEngine::ball_volume(std::size_t y, const Rat& r) const {
    Rat v = 0;
    for (std::size_t i = 0; i < ex_.size(); ++i)
        if (ex_.dist[y][i] <= r) v += ex_.masses[i];
    return v;
}

ExactFiniteEngine::ExactFiniteEngine(ExactFiniteSpace space, RationalRadialMeasure xi)
    : ex_(std::move(space)), xi_(std::move(xi)) {
    const std::size_t m = ex_.size();
    const std::size_t nr = xi_.radii.size();
    lambda_pair_.assign(m, std::vector<Rat>(m, Rat(0)));
    star_pair_.assign(m, std::vector<Rat>(m, Rat(0)));
    mean_star_r_.assign(nr, Rat(0));

    std::vector<std::vector<Rat>> vol(nr, std::vector<Rat>(m));
    for (std::size_t a = 0; a < nr; ++a)
        for (std::size_t y = 0; y < m; ++y) vol[a][y] = ball_volume(y, xi_.radii[a]);

    for (std::size_t a = 0; a < nr; ++a) {
        for (std::size_t y = 0; y < m; ++y)
            mean_star_r_[a] += ex_.masses[y] * 2 * (vol[a][y] - vol[a][y] * vol[a][y]);
        mean_ += xi_.weights[a] * mean_star_r_[a];
    }

    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i; j < m; ++j) {
            Rat lam = 0, star = 0;
            for (std::size_t a = 0; a < nr; ++a) {
                const Rat& r = xi_.radii[a];
                Rat lam_r = 0, star_r = 0;
                for (std::size_t y = 0; y < m; ++y) {
                    bool in1 = ex_.dist[i][y] <= r;
                    bool in2 = ex_.dist[j][y] <= r;
                    Rat d1 = (in1 ? Rat(1) : Rat(0)) - vol[a][y];
                    Rat d2 = (in2 ? Rat(1) : Rat(0)) - vol[a][y];
                    lam_r += ex_.masses[y] * d1 * d2;
                    if (in1 != in2) star_r += ex_.masses[y];
                }
                lam += xi_.weights[a] * lam_r;
                star += xi_.weights[a] * star_r;
            }
            lambda_pair_[i][j] = lambda_pair_[j][i] = lam;
            star_pair_[i][j] = star_pair_[j][i] = star;
        }
}

Rat ExactFiniteEngine::lambda_xi(const std::vector<std::size_t>& idx) const {
    Rat s = 0;
    for (std::size_t a : idx)
        for (std::size_t b : idx) s += lambda_pair_[a][b];
    return s;
}

Rat ExactFiniteEngine::rho_star_sum(const std::vector<std::size_t>& idx) const {
    Rat s = 0;
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < idx.size(); ++j)
            if (i != j) s += star_pair_[idx[i]][idx[j]];
    return s;
}

Rat ExactFiniteEngine::defect(const std::vector<std::size_t>& idx) const {
    Rat n2 = Rat(static_cast<long>(idx.size())) * Rat(static_cast<long>(idx.size()));
    return 2 * lambda_xi(idx) + rho_star_sum(idx) - n2 * mean_;
}

Rat ExactFiniteEngine::pair_residual_r(std::size_t a, std::size_t b,
                                       std::size_t radius_index) const {
    const Rat& r = xi_.radii[radius_index];
    const std::size_t m = ex_.size();
    Rat lam_r = 0, star_r = 0;
    for (std::size_t y = 0; y < m; ++y) {
        bool in1 = ex_.dist[a][y] <= r;
        bool in2 = ex_.dist[b][y] <= r;
        Rat d1 = (in1 ? Rat(1) : Rat(0)) - ball_volume(y, r);
        Rat d2 = (in2 ? Rat(1) : Rat(0)) - ball_volume(y, r);
        lam_r += ex_.masses[y] * d1 * d2;
        if (in1 != in2) star_r += ex_.masses[y];
    }
    return 2 * lam_r + star_r - mean_star_r_[radius_index];
}

Rat ExactFiniteEngine::pair_residual_xi(std::size_t a, std::size_t b) const {
    return 2 * lambda_pair_[a][b] + star_pair_[a][b] - mean_;
}

// ---------------------------------------------------------------------------
// Invariance defect
// ---------------------------------------------------------------------------

namespace {

const ExactFiniteEngine& cached_engine(const Space& space, const ExactFiniteSpace& ex) {
    static std::mutex mu;
    static std::map<std::string, std::unique_ptr<ExactFiniteEngine>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(space.name());
    if (it == cache.end()) {
        auto eng = std::make_unique<ExactFiniteEngine>(ex, exact_uniform_xi(ex));
        it = cache.emplace(space.name(), std::move(eng)).first;
    }
    return *it->second;
}

bool is_uniform_atomic_on_radii(const RadialMeasure& xi, const std::vector<double>& radii) {
    if (xi.kind() != RadialMeasure::Kind::Atomic) return false;
    if (xi.atom_radii().size() != radii.size()) return false;
    double w0 = xi.atom_weights().empty() ? 0.0 : xi.atom_weights()[0];
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (std::abs(xi.atom_radii()[i] - radii[i]) > 1e-12) return false;
        if (std::abs(xi.atom_weights()[i] - w0) > 1e-15) return false;
    }
    return true;
}

std::vector<std::size_t> point_indices(const Space& space, const PointSet& pts) {
    std::vector<std::size_t> idx;
    for (const auto& p : pts.points) {
        auto i = space.index_of(p);
        if (!i) throw std::domain_error("point is not an element of the finite space");
        idx.push_back(*i);
    }
    return idx;
}

}  // namespace

InvarianceOutcome exact_invariance_defect(const Space& space, const PointSet& pts,
                                          const RadialMeasure& xi,
                                          const DiscrepancyOpts& opts) {
    if (pts.size() < 1) throw std::invalid_argument("exact_invariance_defect: empty point set");
    if (!space.distance_invariant())
        throw PreconditionError(
            "exact_invariance_defect: space is not distance-invariant; use the probabilistic check");
    const double n = static_cast<double>(pts.size());
    InvarianceOutcome out;

    if (space.finite()) {
        auto ex = space.exact();
        if (ex && is_uniform_atomic_on_radii(xi, space.radii_set())) {
            const ExactFiniteEngine& eng = cached_engine(space, *ex);
            auto idx = point_indices(space, pts);
            Rat d = eng.defect(idx);
            out.defect = to_double(d);
            out.lhs = to_double(2 * eng.lambda_xi(idx) + eng.rho_star_sum(idx));
            out.rhs = out.lhs - out.defect;
            out.tolerance = 0.0;
            out.exact_zero = d == 0;
            out.mode = "rational";
            return out;
        }
        // float path with exact finite sums
        double lambda = l2_discrepancy_xi(space, pts, xi).value;
        CompensatedSum star;
        for (std::size_t i = 0; i < pts.size(); ++i)
            for (std::size_t j = i + 1; j < pts.size(); ++j)
                star.add(symdiff_metric_xi(space, xi, pts.points[i], pts.points[j],
                                           SymdiffMode::SigmaForm)
                             .value);
        double mean = mean_rho_star_xi(space, xi).value;
        out.lhs = 2.0 * lambda + 2.0 * star.value();
        out.rhs = n * n * mean;
        out.defect = out.lhs - out.rhs;
        out.tolerance = 1e-9;
        out.mode = "piecewise";
        return out;
    }

    if (space.name() == "circle") {
        ConfigStats cs = circle_config_stats(space, xi, pts.points);
        out.lhs = 2.0 * cs.lambda_xi + cs.rho_star_sum;
        out.rhs = n * n * circle_mean_rho_star_xi_exact(xi);
        out.defect = out.lhs - out.rhs;
        out.tolerance = 1e-9;
        out.mode = "piecewise";
        return out;
    }

    // Deterministic pair route for the kernel part where the symmetric
    // difference has a closed form over the support of xi; the pair sum
    // itself comes from the tail-function form with fresh Monte Carlo, so
    // the two sides stay independent.
    const double support_hi = xi.support_max();
    Point probe = canonical_point(space);
    bool closed_ok = space.symdiff_r_closed(probe, probe, std::min(support_hi, space.diameter()))
                         .has_value();
    Point y0 = canonical_point(space);
    auto volume = [&](double r) {
        return space.ball_volume(y0, std::clamp(r, 0.0, space.diameter())).value;
    };

    CompensatedSum lambda_acc;
    double star_sum = 0.0, star_var = 0.0;
    if (closed_ok) {
        for (std::size_t i = 0; i < pts.size(); ++i)
            for (std::size_t j = 0; j < pts.size(); ++j) {
                auto integrand = [&](double r) {
                    double v = volume(r);
                    double star = j == i ? 0.0 : *space.symdiff_r_closed(pts.points[i],
                                                                          pts.points[j], r);
                    return v - v * v - 0.5 * star;
                };
                std::vector<double> hints = space.volume_breakpoints(y0);
                if (j != i) {
                    auto kinks = space.symdiff_breakpoints(pts.points[i], pts.points[j]);
                    hints.insert(hints.end(), kinks.begin(), kinks.end());
                }
                lambda_acc.add(xi.integrate(integrand, hints, 32));
            }
    } else {
        // generic unbiased estimator, batched for an error estimate
        RngStream rng(opts.seed ^ 0x1a2bull);
        RunningStats lam_stats;
        const int batches = 24;
        long per = std::max(16L, opts.samples / (batches * 10));
        for (int b = 0; b < batches; ++b) {
            ConfigStats cs = config_stats_mc(space, xi, pts.points, per, rng);
            lam_stats.add(cs.lambda_xi);
        }
        lambda_acc.add(lam_stats.mean());
        star_var += 4.0 * lam_stats.stderr_of_mean() * lam_stats.stderr_of_mean();
    }
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            DiscrepancyOpts popts = opts;
            popts.samples = std::max(4000L, opts.samples / 4);
            RngStream seeder = RngStream::substream(opts.seed, i * pts.size() + j);
            popts.seed = seeder.next_u64();
            Estimate e = symdiff_metric_xi(space, xi, pts.points[i], pts.points[j],
                                           SymdiffMode::SigmaForm, popts);
            star_sum += 2.0 * e.value;
            star_var += 4.0 * e.stderr_ * e.stderr_;
        }
    out.lhs = 2.0 * lambda_acc.value() + star_sum;
    out.rhs = n * n * mean_rho_star_xi(space, xi).value;
    out.defect = out.lhs - out.rhs;
    out.tolerance = 3.0 * std::sqrt(star_var);
    out.mode = "estimate";
    return out;
}

// ---------------------------------------------------------------------------
// OmegaSampler
// ---------------------------------------------------------------------------

OmegaSampler::OmegaSampler(SpacePartition partition) : part_(std::move(partition)) {
    if (!part_.space) throw std::invalid_argument("OmegaSampler: partition without space");
    finite_cum_.resize(part_.cells.size());
    for (std::size_t c = 0; c < part_.cells.size(); ++c) {
        const auto& cell = part_.cells[c];
        if (!cell.indices.empty()) {
            double acc = 0.0;
            for (std::size_t i : cell.indices) {
                acc += part_.space->point_mass(i);
                finite_cum_[c].push_back(acc);
            }
        } else if (!part_.base_measure) {
            throw std::invalid_argument("OmegaSampler: chart cells need a base measure");
        }
    }
}

Point OmegaSampler::sample_cell(std::size_t i, RngStream& rng) const {
    const auto& cell = part_.cells[i];
    if (!cell.indices.empty()) {
        double u = rng.uniform() * finite_cum_[i].back();
        auto it = std::lower_bound(finite_cum_[i].begin(), finite_cum_[i].end(), u);
        std::size_t k = std::min<std::size_t>(it - finite_cum_[i].begin(),
                                              cell.indices.size() - 1);
        return part_.space->point_at(cell.indices[k]);
    }
    auto z = part_.base_measure->sample_in_box(cell.lo, cell.hi, rng);
    return part_.space->chart()->map(z);
}

PointSet OmegaSampler::sample(RngStream& rng) const {
    PointSet ps;
    ps.space_name = part_.space->name();
    ps.provenance = Provenance::PartitionCellRandom;
    for (std::size_t i = 0; i < part_.cells.size(); ++i)
        ps.points.push_back(sample_cell(i, rng));
    return ps;
}

// ---------------------------------------------------------------------------
// Trials
// ---------------------------------------------------------------------------

namespace {

ConfigStats config_stats_exact_finite(const Space& space, const RadialMeasure& xi,
                                      const std::vector<Point>& points) {
    // exact center sums instead of center sampling
    ConfigStats out;
    const std::size_t n = points.size();
    CompensatedSum rho;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) rho.add(space.metric(points[i], points[j]));
    out.rho_sum = 2.0 * rho.value();

    CompensatedSum lam, star;
    std::vector<double> dists(n);
    for (std::size_t yi = 0; yi < space.point_count(); ++yi) {
        Point y = space.point_at(yi);
        for (std::size_t i = 0; i < n; ++i) dists[i] = space.metric(points[i], y);
        std::sort(dists.begin(), dists.end());
        double m = space.point_mass(yi);
        auto deviation = [&](double r) {
            double count = static_cast<double>(
                std::upper_bound(dists.begin(), dists.end(), r + 1e-12) - dists.begin());
            return count - static_cast<double>(n) * space.ball_volume(y, r).value;
        };
        if (xi.kind() == RadialMeasure::Kind::Atomic) {
            CompensatedSum inner;
            const auto& radii = xi.atom_radii();
            const auto& weights = xi.atom_weights();
            for (std::size_t a = 0; a < radii.size(); ++a) {
                double dev = deviation(radii[a]);
                inner.add(weights[a] * dev * dev);
            }
            lam.add(m * inner.value());
        } else {
            // the squared deviation is a step function of r; split at the
            // realized radii and the configuration distances
            std::vector<double> hints = space.radii_set();
            hints.insert(hints.end(), dists.begin(), dists.end());
            lam.add(m * xi.integrate(
                            [&](double r) {
                                double dev = deviation(r);
                                return dev * dev;
                            },
                            std::move(hints), 4));
        }
        CompensatedSum ps;
        for (std::size_t k = 0; k < n; ++k) {
            double s = xi.sigma(dists[k]);
            ps.add(s * (static_cast<double>(n) - 1.0 - 2.0 * static_cast<double>(k)));
        }
        star.add(m * 2.0 * ps.value());
    }
    out.lambda_xi = lam.value();
    out.rho_star_sum = star.value();
    return out;
}

}  // namespace

TrialAggregate run_trials(const OmegaSampler& sampler, const RadialMeasure& xi, long trials,
                          std::uint64_t seed, const TrialOpts& opts) {
    if (trials < 1) throw std::invalid_argument("run_trials: trials >= 1");
    const Space& space = sampler.space();
    const bool circle = space.name() == "circle";
    const bool finite = space.finite();

    std::vector<ConfigStats> results(trials);
    parallel_for(static_cast<std::size_t>(trials), opts.threads, [&](std::size_t t) {
        RngStream rng = RngStream::substream(seed, t);
        PointSet pts = sampler.sample(rng);
        if (circle)
            results[t] = circle_config_stats(space, xi, pts.points);
        else if (finite)
            results[t] = config_stats_exact_finite(space, xi, pts.points);
        else
            results[t] = config_stats_mc(space, xi, pts.points, opts.y_samples, rng);
    });

    RunningStats lam, star, rho, lhs;
    double best = 0.0;
    for (const auto& cs : results) {
        lam.add(cs.lambda_xi);
        star.add(cs.rho_star_sum);
        rho.add(cs.rho_sum);
        lhs.add(2.0 * cs.lambda_xi + cs.rho_star_sum);
        best = std::max(best, cs.rho_sum);
    }
    TrialAggregate agg;
    std::string method = circle || finite ? "mc-exact-config" : "mc";
    agg.lambda_xi = {lam.mean(), lam.stderr_of_mean(), method};
    agg.rho_star_sum = {star.mean(), star.stderr_of_mean(), method};
    agg.rho_sum = {rho.mean(), rho.stderr_of_mean(), "mc"};
    agg.identity_lhs = {lhs.mean(), lhs.stderr_of_mean(), method};
    agg.rho_best = best;
    agg.trials = trials;
    return agg;
}

Estimate expectation_mc(const OmegaSampler& sampler, const RadialMeasure& xi, StatKind kind,
                        long trials, std::uint64_t seed, const TrialOpts& opts) {
    if (trials < 2) throw std::invalid_argument("expectation_mc: trials >= 2");
    TrialAggregate agg = run_trials(sampler, xi, trials, seed, opts);
    switch (kind) {
        case StatKind::Rho: return agg.rho_sum;
        case StatKind::RhoStarXi: return agg.rho_star_sum;
        default: return agg.lambda_xi;
    }
}

Estimate expectation_f1(const OmegaSampler& sampler,
                        const std::function<double(const Point&)>& f, long trials,
                        std::uint64_t seed, const TrialOpts& opts) {
    if (trials < 2) throw std::invalid_argument("expectation_f1: trials >= 2");
    std::vector<double> vals(trials);
    parallel_for(static_cast<std::size_t>(trials), opts.threads, [&](std::size_t t) {
        RngStream rng = RngStream::substream(seed, t);
        PointSet pts = sampler.sample(rng);
        CompensatedSum acc;
        for (const auto& p : pts.points) acc.add(f(p));
        vals[t] = acc.value();
    });
    RunningStats stats;
    for (double v : vals) stats.add(v);
    return {stats.mean(), stats.stderr_of_mean(), "mc"};
}

Estimate expectation_f2(const OmegaSampler& sampler,
                        const std::function<double(const Point&, const Point&)>& f, long trials,
                        std::uint64_t seed, const TrialOpts& opts) {
    if (trials < 2) throw std::invalid_argument("expectation_f2: trials >= 2");
    std::vector<double> vals(trials);
    parallel_for(static_cast<std::size_t>(trials), opts.threads, [&](std::size_t t) {
        RngStream rng = RngStream::substream(seed, t);
        PointSet pts = sampler.sample(rng);
        CompensatedSum acc;
        for (std::size_t i = 0; i < pts.size(); ++i)
            for (std::size_t j = 0; j < pts.size(); ++j)
                if (i != j) acc.add(f(pts.points[i], pts.points[j]));
        vals[t] = acc.value();
    });
    RunningStats stats;
    for (double v : vals) stats.add(v);
    return {stats.mean(), stats.stderr_of_mean(), "mc"};
}

// ---------------------------------------------------------------------------
// Closed forms for product-space expectations
// ---------------------------------------------------------------------------

ProductExpectationResult product_expectation_closed_forms(const OmegaSampler& sampler,
                                   const std::function<double(const Point&)>& f1,
                                   const std::function<double(const Point&, const Point&)>& f2,
                                   const ProductExpectationOpts& opts) {
    const Space& space = sampler.space();
    const double n = static_cast<double>(sampler.cell_count());
    ProductExpectationResult out;

    if (space.finite()) {
        CompensatedSum s1, s2;
        const std::size_t m = space.point_count();
        for (std::size_t i = 0; i < m; ++i) {
            Point yi = space.point_at(i);
            s1.add(space.point_mass(i) * f1(yi));
            for (std::size_t j = 0; j < m; ++j)
                s2.add(space.point_mass(i) * space.point_mass(j) * f2(yi, space.point_at(j)));
        }
        CompensatedSum cells;
        for (const auto& cell : sampler.partition().cells)
            for (std::size_t a : cell.indices)
                for (std::size_t b : cell.indices)
                    cells.add(space.point_mass(a) * space.point_mass(b) *
                              f2(space.point_at(a), space.point_at(b)));
        out.f1 = {n * s1.value(), 0.0, "exact"};
        out.f2 = {n * n * (s2.value() - cells.value()), 0.0, "exact"};
        return out;
    }

    RngStream rng(opts.seed);
    RunningStats s1, s2;
    for (long s = 0; s < opts.samples; ++s) {
        s1.add(f1(space.sample(rng)));
        s2.add(f2(space.sample(rng), space.sample(rng)));
    }
    double cell_total = 0.0, cell_var = 0.0;
    for (std::size_t c = 0; c < sampler.cell_count(); ++c) {
        RunningStats q;
        for (long s = 0; s < opts.cell_samples; ++s)
            q.add(f2(sampler.sample_cell(c, rng), sampler.sample_cell(c, rng)));
        double mu = sampler.partition().cells[c].measure;
        cell_total += mu * mu * q.mean();
        cell_var += std::pow(mu * mu * q.stderr_of_mean(), 2);
    }
    out.f1 = {n * s1.mean(), n * s1.stderr_of_mean(), "mc"};
    double value = n * n * (s2.mean() - cell_total);
    double se = n * n * std::sqrt(s2.stderr_of_mean() * s2.stderr_of_mean() + cell_var);
    out.f2 = {value, se, "mc"};
    return out;
}

Rat product_expectation_f1_exact(const ExactFiniteSpace& ex,
                     const std::vector<std::vector<std::size_t>>& cells,
                     const std::function<Rat(std::size_t)>& f) {
    Rat n = static_cast<long>(cells.size());
    Rat s = 0;
    for (std::size_t i = 0; i < ex.size(); ++i) s += ex.masses[i] * f(i);
    return n * s;
}

Rat product_expectation_f2_exact(const ExactFiniteSpace& ex,
                     const std::vector<std::vector<std::size_t>>& cells,
                     const std::function<Rat(std::size_t, std::size_t)>& f) {
    Rat n = static_cast<long>(cells.size());
    Rat whole = 0;
    for (std::size_t i = 0; i < ex.size(); ++i)
        for (std::size_t j = 0; j < ex.size(); ++j)
            whole += ex.masses[i] * ex.masses[j] * f(i, j);
    Rat diag = 0;
    for (const auto& cell : cells)
        for (std::size_t a : cell)
            for (std::size_t b : cell) diag += ex.masses[a] * ex.masses[b] * f(a, b);
    return n * n * (whole - diag);
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

InvarianceReport probabilistic_invariance_check(const OmegaSampler& sampler,
                                                const RadialMeasure& xi, long trials,
                                                std::uint64_t seed, const TrialOpts& opts) {
    if (trials < 2) throw std::invalid_argument("probabilistic_invariance_check: trials >= 2");
    const Space& space = sampler.space();
    InvarianceReport rep;
    rep.space_name = space.name();
    rep.xi_description = xi.description();
    rep.n = sampler.cell_count();
    rep.trials = trials;
    rep.seed = seed;

    TrialAggregate agg = run_trials(sampler, xi, trials, seed, opts);
    rep.lambda_mean = agg.lambda_xi;
    rep.rho_star_mean = agg.rho_star_sum;
    rep.lhs = agg.identity_lhs;

    Estimate mean;
    if (space.name() == "circle")
        mean = {circle_mean_rho_star_xi_exact(xi), 0.0, "piecewise"};
    else
        mean = mean_rho_star_xi(space, xi, {400000, seed ^ 0x9e37ull});
    double n2 = static_cast<double>(rep.n) * static_cast<double>(rep.n);
    rep.rhs = {n2 * mean.value, n2 * mean.stderr_, mean.method};
    rep.defect = rep.lhs.value - rep.rhs.value;
    rep.combined_se =
        std::sqrt(rep.lhs.stderr_ * rep.lhs.stderr_ + rep.rhs.stderr_ * rep.rhs.stderr_);
    rep.mode = (agg.identity_lhs.method == "mc-exact-config" && rep.rhs.stderr_ == 0.0)
                   ? "exact-config"
                   : "mc";

    if (space.distance_invariant() && (space.name() == "circle" || space.finite())) {
        RngStream rng = RngStream::substream(seed, 0);
        PointSet pts = sampler.sample(rng);
        try {
            rep.exact_config_defect = exact_invariance_defect(space, pts, xi).defect;
        } catch (const std::exception&) {
            // leave empty when no exact engine applies
        }
    }
    return rep;
}

BoundReport bound_report(const OmegaSampler& sampler, const RadialMeasure& xi, long trials,
                         std::uint64_t seed, const TrialOpts& opts) {
    const Space& space = sampler.space();
    const SpacePartition& part = sampler.partition();
    BoundReport rep;
    rep.space_name = space.name();
    rep.xi_description = xi.description();
    rep.n = sampler.cell_count();
    rep.d = space.dim();
    rep.trials = trials;
    rep.seed = seed;
    rep.mean_rho = mean_distance(space, {MeanDistanceOpts::Mode::Auto, 200000, seed ^ 0xabcdull});
    rep.norm1 = part.avg_diameter();
    rep.norm_inf = part.max_diameter();

    const double n = static_cast<double>(rep.n);
    rep.rho_lower_bound = n * n * rep.mean_rho.value - n * rep.norm1;

    TrialAggregate agg = run_trials(sampler, xi, trials, seed, opts);
    rep.rho_mc_mean = agg.rho_sum;
    rep.lambda_mc_mean = agg.lambda_xi;
    rep.rho_star_mc_mean = agg.rho_star_sum;
    rep.rho_best = agg.rho_best;

    Estimate star_mean = space.name() == "circle"
                             ? Estimate{circle_mean_rho_star_xi_exact(xi), 0.0, "piecewise"}
                             : mean_rho_star_xi(space, xi, {100000, seed ^ 0x77aaull});
    rep.invariance_defect = agg.identity_lhs.value - n * n * star_mean.value;
    rep.invariance_ci =
        3.0 * std::hypot(agg.identity_lhs.stderr_, n * n * star_mean.stderr_);
    try {
        PointSet lat = lattice_points(space, rep.n);
        rep.rho_best = std::max(rep.rho_best, sum_distances(space, lat));
    } catch (const std::exception&) {
        // spaces without a lattice generator just use the sampled witness
    }

    rep.c0 = xi.c0(space.radii_set());
    if (rep.c0) rep.lambda_upper_bound = 0.5 * (*rep.c0) * n * rep.norm1;

    if (const ChartInfo* chart = space.chart(); chart && chart->lipschitz) {
        rep.lipschitz = chart->lipschitz;
        double d = static_cast<double>(chart->dim);
        double lead = d * std::ldexp(1.0, chart->dim - 1) * (*chart->lipschitz) *
                      std::pow(n, 1.0 - 1.0 / d);
        rep.apriori_rho_lower = n * n * rep.mean_rho.value - lead;
        if (rep.c0) rep.apriori_lambda_upper = 0.5 * lead * (*rep.c0);
    }

    // cell self double integrals of the metric and their a priori bound
    RngStream rng(seed ^ 0x517eull);
    double total = 0.0, var = 0.0;
    for (std::size_t c = 0; c < sampler.cell_count(); ++c) {
        RunningStats q;
        for (long s = 0; s < 2048; ++s)
            q.add(space.metric(sampler.sample_cell(c, rng), sampler.sample_cell(c, rng)));
        double mu = part.cells[c].measure;
        total += mu * mu * q.mean();
        var += std::pow(mu * mu * q.stderr_of_mean(), 2);
    }
    rep.qn_rho = {total, std::sqrt(var), "mc"};
    rep.qn_bound = rep.norm1 / n;
    return rep;
}

}  // namespace mps

#pragma once

#include "metricpoints/measures.hpp"
#include "metricpoints/spaces.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace mps {

struct DiscrepancyOpts {
    long samples = 100000;  // Monte Carlo budget where sampling is needed
    std::uint64_t seed = 1;
};

/// Sum of the metric over all ordered pairs (the diagonal contributes 0);
/// duplicate points count with multiplicity.
double sum_distances(const Space& space, const PointSet& pts);

/// Signed deviation of the ball point count from N times the ball volume.
double local_discrepancy(const Space& space, const PointSet& pts, const Point& y, double r,
                         const DiscrepancyOpts& opts = {});

enum class L2Mode { Integral, Kernel };

/// Mean square of the local discrepancy over ball centers at a fixed
/// radius.  Integral mode integrates the squared deviation over centers
/// (exact for finite spaces, piecewise-exact on the circle, Monte Carlo
/// otherwise); kernel mode assembles the same quantity from the two-point
/// kernel decomposition and the symmetric-difference metric.
Estimate l2_discrepancy_r(const Space& space, const PointSet& pts, double r, L2Mode mode,
                          const DiscrepancyOpts& opts = {});

/// Radial average of l2_discrepancy_r against xi.
Estimate l2_discrepancy_xi(const Space& space, const PointSet& pts, const RadialMeasure& xi,
                           const DiscrepancyOpts& opts = {});

/// Volume of the symmetric difference of the two balls of radius r.
Estimate symdiff_metric_r(const Space& space, const Point& y1, const Point& y2, double r,
                          const DiscrepancyOpts& opts = {});

enum class SymdiffMode { Direct, SigmaForm };

/// Radial average of the symmetric-difference metric.  Direct mode
/// integrates symdiff_metric_r against xi; sigma-form mode integrates
/// |sigma(rho(y1,y)) - sigma(rho(y2,y))| over centers y, which is the same
/// quantity through the tail function.
Estimate symdiff_metric_xi(const Space& space, const RadialMeasure& xi, const Point& y1,
                           const Point& y2, SymdiffMode mode, const DiscrepancyOpts& opts = {});

/// Mean of the symmetric-difference metric over independent pairs, via the
/// ball-volume identity <rho*_r> = 2 * integral of v - v^2 over centers.
Estimate mean_rho_star_xi(const Space& space, const RadialMeasure& xi,
                          const DiscrepancyOpts& opts = {});

struct KernelComponents {
    Estimate a0;
    std::function<Estimate(const Point&)> a1;
};

/// The center-independent and one-point terms of the two-point kernel
/// decomposition 2*lambda_r + rho*_r = A0 + A1(y1) + A1(y2).  Constant in
/// closed form on distance-invariant spaces (A0 = 2 v^2, A1 = v - 2 v^2).
KernelComponents kernel_components(const Space& space, double r,
                                   const DiscrepancyOpts& opts = {});

struct LipschitzCheck {
    double max_ratio = 0.0;
    double c0 = 0.0;
    long pairs = 0;
};

/// Observed maximum of rho*(xi)/rho over sampled pairs; the tail-function
/// bound says this never exceeds c0(xi).
LipschitzCheck lipschitz_check_rho_star(const Space& space, const RadialMeasure& xi, long pairs,
                                        std::uint64_t seed, const DiscrepancyOpts& opts = {});

struct DiscrepancyReport {
    std::string space_name;
    std::string xi_description;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    double rho_sum = 0.0;
    Estimate lambda_xi;
    Estimate rho_star_sum;  // off-diagonal pair sum of rho*(xi)
    Estimate mean_rho;
    Estimate mean_rho_star;
};

DiscrepancyReport compute_discrepancy_report(const Space& space, const PointSet& pts,
                                             const RadialMeasure& xi,
                                             const DiscrepancyOpts& opts = {});

// ---------------------------------------------------------------------------
// Deterministic circle backends (piecewise integration, machine precision)
// ---------------------------------------------------------------------------

/// Exact integral of the squared local discrepancy over circle centers:
/// the deviation is a step function of the center with breakpoints at
/// x_i -+ r, so the integral is a finite sum.
double circle_lambda_r_exact(const std::vector<double>& xs, double r);

/// Exact radial average of circle_lambda_r_exact: the integrand is
/// piecewise polynomial in r between radii where two arc endpoints meet.
double circle_lambda_xi_exact(const std::vector<double>& xs, const RadialMeasure& xi);

/// rho*(xi) between circle points at geodesic distance t (arc arithmetic).
double circle_rho_star_xi_exact(double t, const RadialMeasure& xi);

double circle_mean_rho_star_xi_exact(const RadialMeasure& xi);

// ---------------------------------------------------------------------------
// Shared Monte Carlo estimator for configuration statistics
// ---------------------------------------------------------------------------

struct ConfigStats {
    double lambda_xi = 0.0;     // full double-sum version (diagonal included)
    double rho_star_sum = 0.0;  // off-diagonal pair sum
    double rho_sum = 0.0;       // off-diagonal distance sum (exact)
};

/// Unbiased single-pass estimate of the configuration statistics of a
/// point set: one set of center samples drives both the squared-deviation
/// integral (with an exact inner radial quadrature per center) and the
/// tail-function pair sums.
ConfigStats config_stats_mc(const Space& space, const RadialMeasure& xi,
                            const std::vector<Point>& points, long y_samples, RngStream& rng);

/// Deterministic counterpart on the circle.
ConfigStats circle_config_stats(const Space& circle, const RadialMeasure& xi,
                                const std::vector<Point>& points);

}  // namespace mps

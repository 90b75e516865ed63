#pragma once

#include "metricpoints/discrepancy.hpp"
#include "metricpoints/partition.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace mps {

// ---------------------------------------------------------------------------
// Distance invariance
// ---------------------------------------------------------------------------

struct DistanceInvarianceCheck {
    bool invariant = false;
    double max_deviation = 0.0;
    double tolerance = 0.0;
};

/// Compare ball volumes across centers on a radius grid through an
/// independent route (exact enumeration on finite spaces, Monte Carlo
/// membership counts elsewhere).
DistanceInvarianceCheck check_distance_invariance(const Space& space, int radii_grid = 8,
                                                  int centers = 6, std::uint64_t seed = 1,
                                                  long samples = 20000);

// ---------------------------------------------------------------------------
// Exact backend for finite spaces
// ---------------------------------------------------------------------------

/// Rational-arithmetic tables for a finite space and an atomic radial
/// measure: pair kernels, pair symmetric differences, and the pair-mean.
/// All identities checked through this engine are exact equalities.
class ExactFiniteEngine {
public:
    ExactFiniteEngine(ExactFiniteSpace space, RationalRadialMeasure xi);

    const ExactFiniteSpace& space() const { return ex_; }
    const RationalRadialMeasure& xi() const { return xi_; }

    /// Full double-sum kernel total (diagonal included).
    Rat lambda_xi(const std::vector<std::size_t>& idx) const;
    /// Off-diagonal sum of the radial-averaged symmetric difference.
    Rat rho_star_sum(const std::vector<std::size_t>& idx) const;
    Rat mean_rho_star() const { return mean_; }
    /// 2 lambda + rho* - N^2 <rho*>, identically zero on distance-invariant
    /// spaces.
    Rat defect(const std::vector<std::size_t>& idx) const;

    /// Residual of 2 lambda_r + rho*_r = <rho*_r> for one pair and radius.
    Rat pair_residual_r(std::size_t a, std::size_t b, std::size_t radius_index) const;
    /// Residual of the radial-averaged pair identity.
    Rat pair_residual_xi(std::size_t a, std::size_t b) const;

private:
    Rat ball_volume(std::size_t y, const Rat& r) const;

    ExactFiniteSpace ex_;
    RationalRadialMeasure xi_;
    std::vector<std::vector<Rat>> lambda_pair_, star_pair_;
    std::vector<Rat> mean_star_r_;  // <rho*_r> per radius atom
    Rat mean_ = 0;
};

/// Uniform atomic radial measure on the exact radius set of a finite space.
RationalRadialMeasure exact_uniform_xi(const ExactFiniteSpace& space);

// ---------------------------------------------------------------------------
// Invariance defect
// ---------------------------------------------------------------------------

struct InvarianceOutcome {
    double defect = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    /// |defect| is expected below this: 0 for rational arithmetic, 1e-9 for
    /// the piecewise-exact float engines, 3 combined standard errors for
    /// the estimate path.
    double tolerance = 0.0;
    bool exact_zero = false;
    std::string mode;  // "rational", "piecewise", "estimate"
};

/// Per-configuration invariance defect 2 lambda + rho* - N^2 <rho*(xi)> on
/// a distance-invariant space.  Dispatches to rational arithmetic (finite
/// spaces with matching atomic xi), piecewise integration (circle), or a
/// deterministic-lambda / Monte-Carlo-rho* estimate (torus, sphere).
InvarianceOutcome exact_invariance_defect(const Space& space, const PointSet& pts,
                                          const RadialMeasure& xi,
                                          const DiscrepancyOpts& opts = {});

// ---------------------------------------------------------------------------
// Product sampler over a partition
// ---------------------------------------------------------------------------

/// Draws one point per cell under the renormalized restricted measures; a
/// draw is a configuration of the product space attached to an
/// equal-measure partition.
class OmegaSampler {
public:
    explicit OmegaSampler(SpacePartition partition);

    const SpacePartition& partition() const { return part_; }
    const Space& space() const { return *part_.space; }
    std::size_t cell_count() const { return part_.cells.size(); }

    Point sample_cell(std::size_t i, RngStream& rng) const;
    PointSet sample(RngStream& rng) const;

private:
    SpacePartition part_;
    std::vector<std::vector<double>> finite_cum_;  // per-cell cumulative masses
};

// ---------------------------------------------------------------------------
// Monte Carlo expectations over the product space
// ---------------------------------------------------------------------------

struct TrialOpts {
    long y_samples = 128;  // centers per trial in the generic estimator
    int threads = 0;       // 0: hardware concurrency
};

struct TrialAggregate {
    Estimate lambda_xi;
    Estimate rho_star_sum;
    Estimate rho_sum;
    Estimate identity_lhs;  // 2 lambda + rho*
    double rho_best = 0.0;
    long trials = 0;
};

/// Independent trials of the product sampler; per-trial statistics are
/// unbiased (exact on finite spaces and the circle), and the aggregate
/// carries empirical standard errors.  Deterministic given the seed,
/// independent of the thread count.
TrialAggregate run_trials(const OmegaSampler& sampler, const RadialMeasure& xi, long trials,
                          std::uint64_t seed, const TrialOpts& opts = {});

enum class StatKind { Rho, RhoStarXi, LambdaXi };

Estimate expectation_mc(const OmegaSampler& sampler, const RadialMeasure& xi, StatKind kind,
                        long trials, std::uint64_t seed, const TrialOpts& opts = {});

/// Expectation of sum_i f(x_i) over configurations.
Estimate expectation_f1(const OmegaSampler& sampler,
                        const std::function<double(const Point&)>& f, long trials,
                        std::uint64_t seed, const TrialOpts& opts = {});

/// Expectation of sum_{i != j} f(x_i, x_j) over configurations.
Estimate expectation_f2(const OmegaSampler& sampler,
                        const std::function<double(const Point&, const Point&)>& f, long trials,
                        std::uint64_t seed, const TrialOpts& opts = {});

// ---------------------------------------------------------------------------
// Closed forms for product-space expectations
// ---------------------------------------------------------------------------

struct ProductExpectationOpts {
    long samples = 100000;       // whole-space integrals
    long cell_samples = 4096;    // per-cell double integrals
    std::uint64_t seed = 1;
};

struct ProductExpectationResult {
    Estimate f1;  // N * integral of f
    Estimate f2;  // N^2 * double integral - N^2 * sum of cell self-integrals
};

ProductExpectationResult product_expectation_closed_forms(const OmegaSampler& sampler,
                                   const std::function<double(const Point&)>& f1,
                                   const std::function<double(const Point&, const Point&)>& f2,
                                   const ProductExpectationOpts& opts = {});

/// Exact counterparts on finite spaces (f given on point indices).
Rat product_expectation_f1_exact(const ExactFiniteSpace& ex,
                     const std::vector<std::vector<std::size_t>>& cells,
                     const std::function<Rat(std::size_t)>& f);
Rat product_expectation_f2_exact(const ExactFiniteSpace& ex,
                     const std::vector<std::vector<std::size_t>>& cells,
                     const std::function<Rat(std::size_t, std::size_t)>& f);

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct InvarianceReport {
    std::string space_name;
    std::string xi_description;
    std::size_t n = 0;
    long trials = 0;
    std::uint64_t seed = 0;
    std::string mode;  // "exact", "mc"
    Estimate lambda_mean;
    Estimate rho_star_mean;
    Estimate lhs;  // 2 E lambda + E rho*
    Estimate rhs;  // N^2 <rho*(xi)>
    double defect = 0.0;
    double combined_se = 0.0;
    std::optional<double> exact_config_defect;  // when a per-configuration engine exists
};

/// Probabilistic invariance over the product space: the expectation
/// identity holds on every space, distance-invariant or not.
InvarianceReport probabilistic_invariance_check(const OmegaSampler& sampler,
                                                const RadialMeasure& xi, long trials,
                                                std::uint64_t seed, const TrialOpts& opts = {});

struct BoundReport {
    std::string space_name;
    std::string xi_description;
    std::size_t n = 0;
    int d = 0;
    long trials = 0;
    std::uint64_t seed = 0;
    Estimate mean_rho;
    double norm1 = 0.0;
    double norm_inf = 0.0;
    double rho_lower_bound = 0.0;  // N^2 <rho> - N norm1
    Estimate rho_mc_mean;
    double rho_best = 0.0;
    std::optional<double> c0;
    std::optional<double> lambda_upper_bound;  // c0 N norm1 / 2
    Estimate lambda_mc_mean;
    Estimate rho_star_mc_mean;
    double invariance_defect = 0.0;  // 2 E lambda + E rho* - N^2 <rho*(xi)>
    double invariance_ci = 0.0;      // 3 combined standard errors
    std::optional<double> lipschitz;
    std::optional<double> apriori_rho_lower;     // via d 2^(d-1) Lip N^(1-1/d)
    std::optional<double> apriori_lambda_upper;  // via d 2^(d-2) Lip c0 N^(1-1/d)
    Estimate qn_rho;       // sum of cell self double integrals of rho
    double qn_bound = 0.0;  // norm1 / N
};

/// Assemble the partition-driven bounds and their Monte Carlo witnesses.
/// The lambda bound is omitted (with c0 empty) when xi carries no
/// Lipschitz constant on this space.
BoundReport bound_report(const OmegaSampler& sampler, const RadialMeasure& xi, long trials,
                         std::uint64_t seed, const TrialOpts& opts = {});

}  // namespace mps

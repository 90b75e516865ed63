#pragma once

#include "metricpoints/core.hpp"
#include "metricpoints/rational.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mps {

// ---------------------------------------------------------------------------
// One-dimensional distribution functions
// ---------------------------------------------------------------------------

/// Distribution function of a finite atomless measure on [0,1]: continuous,
/// non-decreasing, value(0) = 0.  `inverse_sup(t)` returns the rightmost
/// point of the level set {z : value(z) = t}; on plateaus this is the right
/// plateau edge, which is what keeps zero-density regions attached to the
/// segment on their left when splitting.
class Cdf1d {
public:
    virtual ~Cdf1d() = default;

    virtual double value(double z) const = 0;
    double total() const { return value(1.0); }

    /// Rightmost preimage of t; bisection to absolute tolerance 1e-12 by
    /// default, overridden with exact inversion where the form allows it.
    virtual double inverse_sup(double t) const;

    /// Evaluation noise floor of value(); the plateau walk in inverse_sup
    /// treats differences below this as equality.  Zero for closed forms.
    virtual double value_tolerance() const { return 0.0; }

    /// Knots where the density changes character; used as quadrature hints.
    virtual std::vector<double> knots() const { return {}; }
};

/// value(z) = mass * z^p, exact inversion.  p = 1 is the uniform measure.
class PowerCdf : public Cdf1d {
public:
    PowerCdf(double p, double mass = 1.0);
    double value(double z) const override;
    double inverse_sup(double t) const override;

private:
    double p_, mass_;
};

/// Piecewise-linear distribution function given by knots; exact inversion
/// honoring the rightmost-preimage convention on flat runs.
class PiecewiseLinearCdf : public Cdf1d {
public:
    PiecewiseLinearCdf(std::vector<double> z, std::vector<double> f);
    double value(double z) const override;
    double inverse_sup(double t) const override;
    std::vector<double> knots() const override { return z_; }

private:
    std::vector<double> z_, f_;
};

/// Distribution function of a density given as a callable; values are
/// computed by adaptive quadrature on demand.
class DensityCdf : public Cdf1d {
public:
    explicit DensityCdf(std::function<double(double)> density, double tol = 1e-11);
    double value(double z) const override;
    double value_tolerance() const override { return 20.0 * tol_; }

private:
    std::function<double(double)> density_;
    double tol_;
};

/// Scales another distribution function by a constant factor (conditional
/// slices of product measures).
class ScaledCdf : public Cdf1d {
public:
    ScaledCdf(std::shared_ptr<const Cdf1d> base, double scale)
        : base_(std::move(base)), scale_(scale) {}
    double value(double z) const override { return scale_ * base_->value(z); }
    double inverse_sup(double t) const override;
    double value_tolerance() const override { return scale_ * base_->value_tolerance(); }
    std::vector<double> knots() const override { return base_->knots(); }

private:
    std::shared_ptr<const Cdf1d> base_;
    double scale_;
};

// ---------------------------------------------------------------------------
// Measures on the unit cube
// ---------------------------------------------------------------------------

/// A probability measure on [0,1]^d without atoms: uniform, a product of
/// per-axis densities, or a general density.  Product measures have exact
/// box masses and conditional distribution functions; general densities
/// fall back to nested adaptive quadrature.
class CubeMeasure {
public:
    enum class Kind { Uniform, Product, General };

    static CubeMeasure uniform(int dim);
    static CubeMeasure product(std::vector<std::shared_ptr<const Cdf1d>> axes);
    static CubeMeasure general(int dim, std::function<double(std::span<const double>)> density,
                               std::string description);

    /// Named measures accepted by the CLI and the space registry:
    /// "uniform", "product-zsq" (density 2z per axis; "product-4z1z2" is the
    /// d=2 alias), "halfstep" (uniform axis 0, density 2*[z>=1/2] on axis 1).
    static CubeMeasure named(const std::string& name, int dim);

    int dim() const { return dim_; }
    Kind kind() const { return kind_; }
    const std::string& description() const { return description_; }

    double box_mass(std::span<const double> lo, std::span<const double> hi) const;

    /// Distribution function along `axis` of the measure restricted to the
    /// box fixed on axes [0, axis): z -> mass(box with axis-interval [0,z]).
    std::shared_ptr<const Cdf1d> conditional_cdf(std::span<const double> lo,
                                                 std::span<const double> hi, int axis) const;

    /// Sample a point of the measure conditioned on the box (exact per-axis
    /// inversion for uniform/product, rejection for general densities).
    std::vector<double> sample_in_box(std::span<const double> lo, std::span<const double> hi,
                                      RngStream& rng) const;

    std::vector<double> sample(RngStream& rng) const;

    double density_at(std::span<const double> z) const;

private:
    CubeMeasure() = default;
    int dim_ = 0;
    Kind kind_ = Kind::Uniform;
    std::vector<std::shared_ptr<const Cdf1d>> axes_;
    std::function<double(std::span<const double>)> density_;
    std::string description_ = "uniform";
    double density_bound_ = 1.0;  // for rejection sampling
};

// ---------------------------------------------------------------------------
// Radial measures
// ---------------------------------------------------------------------------

/// Finite non-negative measure xi on the radius set of a space, with the
/// tail function sigma(r) = xi([r, L]).  The Lipschitz constant c0 is the
/// best bound with xi([a,b)) <= c0 |a-b| over radii a <= b in the space's
/// radius set; it exists for interval densities always, and for atomic xi
/// only when the radius set itself is finite.
class RadialMeasure {
public:
    enum class Kind { Lebesgue, Atomic };

    /// Lebesgue measure on [lo, hi] (mass hi - lo, c0 = 1).
    static RadialMeasure lebesgue(double lo, double hi);
    /// Atoms at the given radii with the given weights.
    static RadialMeasure atomic(std::vector<double> radii, std::vector<double> weights);
    /// Equal atoms of total mass 1 on the given radii.
    static RadialMeasure uniform_atomic(std::vector<double> radii);

    Kind kind() const { return kind_; }
    double total_mass() const;
    double support_max() const;  // upper end of the support

    /// Tail mass xi([r, +inf)); callers restrict r to [0, L].
    double sigma(double r) const;

    /// Mass of the half-open interval [a, b).
    double interval_mass(double a, double b) const;

    /// c0 relative to a radius set: the full interval [0, L] when
    /// `finite_radii` is empty, otherwise the listed radii.
    std::optional<double> c0(const std::vector<double>& finite_radii) const;

    /// Integral of f against xi; `hints` are breakpoints of f for the
    /// Lebesgue case.
    double integrate(const std::function<double(double)>& f,
                     std::vector<double> hints = {}, int gauss_order = 16) const;

    const std::vector<double>& atom_radii() const { return radii_; }
    const std::vector<double>& atom_weights() const { return weights_; }
    double lebesgue_lo() const { return lo_; }
    double lebesgue_hi() const { return hi_; }

    std::string description() const;

private:
    Kind kind_ = Kind::Lebesgue;
    double lo_ = 0.0, hi_ = 1.0;
    std::vector<double> radii_, weights_;
};

/// Tail function evaluation with the range check on r (r must lie in
/// [0, diameter]); thin wrapper used by the public op surface.
double sigma_eval(const RadialMeasure& xi, double r, double diameter);

/// Exact (rational) atomic radial measure used by the exact backend.
struct RationalRadialMeasure {
    std::vector<Rat> radii;
    std::vector<Rat> weights;

    static RationalRadialMeasure uniform_atomic(std::vector<Rat> radii);

    Rat total_mass() const;
    Rat sigma(const Rat& r) const;
    /// Largest xi([a,b)) / (b-a) over radius pairs a < b.
    Rat c0() const;
};

}  // namespace mps

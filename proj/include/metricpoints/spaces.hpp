#pragma once

#include "metricpoints/core.hpp"
#include "metricpoints/measures.hpp"
#include "metricpoints/rational.hpp"

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mps {

/// A point is a coordinate tuple whose meaning is space-specific: a wrapped
/// coordinate on the circle/torus, cube coordinates, 0/1 bits on the
/// Hamming cube, a unit 3-vector on the sphere, or a single index into a
/// finite point list.
using Point = std::vector<double>;

enum class MeasureKind { ExactFinite, ClosedForm, Sampled };

enum class Provenance { IidRandom, PartitionCellRandom, PartitionCellCenter, Lattice, User };

std::string provenance_name(Provenance p);

struct PointSet {
    std::string space_name;
    Provenance provenance = Provenance::User;
    std::uint64_t seed = 0;
    std::vector<Point> points;
    std::size_t size() const { return points.size(); }
};

/// Injective Lipschitz parametrization of a space by (a full-measure subset
/// of) the unit cube, carrying the base measure that pushes forward to the
/// space measure.  `lipschitz` is absent when the constant is only known
/// empirically (the area-preserving sphere chart blows up at the poles).
struct ChartInfo {
    int dim = 0;
    std::optional<double> lipschitz;
    const CubeMeasure* base = nullptr;
    std::function<Point(std::span<const double>)> map;
};

struct BallVolumeOpts {
    long samples = 100000;
    std::uint64_t seed = 1;
};

/// Exact description of a finite space: rational masses and distances.
struct ExactFiniteSpace {
    std::vector<Rat> masses;
    std::vector<std::vector<Rat>> dist;
    std::vector<Rat> radii;  // distinct realized distances, ascending
    Rat diameter = 0;
    std::size_t size() const { return masses.size(); }
};

/// A compact metric-measure space with total measure 1.  Immutable after
/// construction; all sampling takes an explicit RNG stream.
class Space {
public:
    virtual ~Space() = default;

    virtual std::string name() const = 0;
    /// Intrinsic dimension: the chart dimension for rectifiable spaces, the
    /// bit count for Hamming cubes, 0 for generic finite point lists.
    virtual int dim() const = 0;
    virtual double diameter() const = 0;
    virtual MeasureKind measure_kind() const = 0;
    virtual bool distance_invariant() const = 0;

    virtual void validate_point(const Point& p) const;
    virtual double metric(const Point& x, const Point& y) const = 0;

    /// Measure of the closed ball {x : metric(x,y) <= r}; boundary ties are
    /// inside.  Exact or deterministic for closed-form spaces, Monte Carlo
    /// with a standard error otherwise.
    virtual Estimate ball_volume(const Point& y, double r,
                                 const BallVolumeOpts& opts = {}) const;

    virtual Point sample(RngStream& rng) const = 0;

    /// Realized distances for finite spaces; empty means the whole interval
    /// [0, diameter] is admissible.
    virtual std::vector<double> radii_set() const { return {}; }

    // Finite-space interface.
    virtual bool finite() const { return false; }
    virtual std::size_t point_count() const;
    virtual Point point_at(std::size_t i) const;
    virtual double point_mass(std::size_t i) const;
    virtual std::optional<std::size_t> index_of(const Point& p) const;
    virtual std::optional<ExactFiniteSpace> exact() const { return std::nullopt; }

    // Rectifiable structure.
    virtual const ChartInfo* chart() const { return nullptr; }

    // Closed-form hooks; generic fallbacks are used when absent.
    virtual std::optional<double> mean_distance_closed() const { return std::nullopt; }
    /// Volume of the symmetric difference of two balls of radius r, when a
    /// deterministic evaluation is available.
    virtual std::optional<double> symdiff_r_closed(const Point& y1, const Point& y2,
                                                   double r) const {
        return std::nullopt;
    }
    /// Diameter (under the space metric) of the chart image of a box.
    virtual std::optional<double> box_cell_diameter(std::span<const double> lo,
                                                    std::span<const double> hi) const {
        return std::nullopt;
    }
    /// Radii where r -> ball_volume(y, r) changes analytic form; quadrature
    /// over r splits at these.
    virtual std::vector<double> volume_breakpoints(const Point& y) const { return {}; }

    /// Radii where r -> symdiff_r(y1, y2, r) changes analytic form.  The
    /// default covers the first ball contact and the volume kinks.
    virtual std::vector<double> symdiff_breakpoints(const Point& y1, const Point& y2) const {
        std::vector<double> out = volume_breakpoints(y1);
        out.push_back(0.5 * metric(y1, y2));
        return out;
    }

protected:
    void check_radius(double r) const;
};

struct SpaceSpec {
    std::string name;
    std::string density;  // cube measures only; empty = uniform
};

std::shared_ptr<const Space> make_space(const SpaceSpec& spec);
std::shared_ptr<const Space> make_space(const std::string& name);

/// Finite space from explicit rational masses and a rational distance
/// matrix (validated for symmetry, identity and the triangle inequality).
std::shared_ptr<const Space> make_finite_space(std::string name, std::vector<Rat> masses,
                                               std::vector<std::vector<Rat>> dist);

struct SpaceInfo {
    std::string name;
    int dim;
    double diameter;
    MeasureKind kind;
    bool distance_invariant;
    bool rectifiable;
};

std::vector<SpaceInfo> list_spaces();

/// Default radial measure for a space: Lebesgue on [0, L] for continuous
/// spaces, equal atoms on the realized distances for finite ones.
RadialMeasure default_xi(const Space& space);

/// A fixed representative point (first point of finite spaces, chart image
/// of the cube center otherwise); distance-invariant formulas evaluate
/// their ball volumes here.
Point canonical_point(const Space& space);

/// Mean of the metric over independent pairs.
struct MeanDistanceOpts {
    enum class Mode { Auto, Exact, ClosedForm, MonteCarlo };
    Mode mode = Mode::Auto;
    long samples = 100000;
    std::uint64_t seed = 1;
};

Estimate mean_distance(const Space& space, const MeanDistanceOpts& opts = {});

// Point-set generation ------------------------------------------------------

PointSet sample_iid(const Space& space, std::size_t n, std::uint64_t seed);

/// Evenly spread points: k/N on the circle, a near-square grid on the torus
/// and cube, the first N points of a finite space.
PointSet lattice_points(const Space& space, std::size_t n);

}  // namespace mps

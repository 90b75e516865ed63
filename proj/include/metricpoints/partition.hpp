#pragma once

#include "metricpoints/measures.hpp"
#include "metricpoints/spaces.hpp"

#include <memory>
#include <string>
#include <vector>

namespace mps {

/// Rightmost preimage of t under a continuous distribution function; the
/// public inversion used by segment splitting.  Throws std::out_of_range
/// when t is outside [0, total mass].
double inverse_cdf(const Cdf1d& phi, double t);

/// Partition of [0,1] into k consecutive segments whose masses under a
/// 1-d measure are proportional to integer weights.
struct SegmentPartition {
    std::vector<double> breakpoints;  // size k+1, breakpoints[0] = 0, back() = 1
    std::vector<double> masses;       // per-segment measure
    std::vector<long> weights;
    long total_weight = 0;

    std::size_t segment_count() const { return masses.size(); }
    double length(std::size_t j) const { return breakpoints[j + 1] - breakpoints[j]; }
};

/// Split [0,1] by inverting the distribution function at the scaled partial
/// sums of the weights.  A zero measure (or total weight zero) yields the
/// degenerate partition [0,1], {1}, ..., {1}.  Atomless measures only; the
/// Cdf1d interface cannot express atoms.
SegmentPartition split_segment(const Cdf1d& nu0, const std::vector<long>& weights, long n);

enum class OccupancyStrategy { Lexicographic, Balanced };

std::string strategy_name(OccupancyStrategy s);

struct Occupancy {
    int k = 1;                     // per-axis grid order, k = ceil(N^(1/d))
    std::vector<std::uint8_t> labels;  // k^d zero/one flags, row-major (first index slowest)
};

/// Choose which of the k^d grid cells receive the N points: lexicographic
/// fills in row-major order, balanced equalizes the per-slice counts at
/// every level.
Occupancy assign_occupancy(long n, int dim, OccupancyStrategy strategy);

struct BoxCell {
    std::vector<int> alpha;      // 1-based multi-index
    std::vector<double> lo, hi;  // per-axis interval
    double measure = 0.0;
    double euclid_diameter = 0.0;
};

/// Intermediate node of the inductive construction: a box fixed on the
/// first `level` axes carrying its point count and measure.
struct PartitionNode {
    std::vector<int> prefix;
    std::vector<double> lo, hi;  // intervals for the fixed axes
    long count = 0;
    double mass = 0.0;
};

struct BoxPartition {
    int dim = 0;
    int k = 1;
    long n = 0;
    OccupancyStrategy strategy = OccupancyStrategy::Lexicographic;
    std::shared_ptr<const CubeMeasure> measure;
    std::vector<BoxCell> boxes;                    // the N retained cells
    std::vector<std::vector<PartitionNode>> levels;  // levels[q]: boxes fixed on q axes

    double avg_diameter() const;  // mean Euclidean diameter of retained boxes
    double max_diameter() const;
    /// d 2^(d-1) N^(-1/d), the a priori bound on the average diameter.
    double diameter_bound() const;
};

/// Build the equal-measure box partition of the unit cube: split axis by
/// axis, each box dividing its conditional 1-d distribution in proportion
/// to the occupancy counts, then keep the boxes labelled 1.
BoxPartition build_box_partition(std::shared_ptr<const CubeMeasure> nu, long n,
                                 OccupancyStrategy strategy = OccupancyStrategy::Lexicographic);

enum class DiameterMode { LipschitzBound, MeasuredSampling };

std::string diameter_mode_name(DiameterMode m);

struct SpaceCell {
    // chart-based cells keep their box; finite cells keep point indices
    std::vector<int> alpha;
    std::vector<double> lo, hi;
    std::vector<std::size_t> indices;
    double measure = 0.0;
    double diameter = 0.0;
};

struct SpacePartition {
    std::shared_ptr<const Space> space;
    std::vector<SpaceCell> cells;
    DiameterMode diameter_mode = DiameterMode::LipschitzBound;
    std::shared_ptr<const CubeMeasure> base_measure;  // null for finite partitions

    std::size_t size() const { return cells.size(); }
    double avg_diameter() const;
    double max_diameter() const;
};

struct PushforwardOpts {
    long samples_per_cell = 64;  // measured mode: points sampled per cell
    std::uint64_t seed = 1;
};

/// Carry a box partition through the space chart.  Cell measures transfer
/// exactly; diameters are either a priori bounds (the space's closed-form
/// box diameter when available, otherwise Lip(f) times the box diameter)
/// or sampled lower estimates.
SpacePartition pushforward_partition(std::shared_ptr<const Space> space,
                                     const BoxPartition& boxes, DiameterMode mode,
                                     const PushforwardOpts& opts = {});

/// Equal-measure partition of a space into N cells: box partition of the
/// chart's base measure pushed forward.  Convenience wrapper.
SpacePartition equal_measure_partition(std::shared_ptr<const Space> space, long n,
                                       OccupancyStrategy strategy = OccupancyStrategy::Lexicographic,
                                       DiameterMode mode = DiameterMode::LipschitzBound,
                                       const PushforwardOpts& opts = {});

/// Partition of a finite space into explicit index groups; diameters and
/// measures are exact.
SpacePartition finite_partition(std::shared_ptr<const Space> space,
                                const std::vector<std::vector<std::size_t>>& groups);

/// (average, maximum) cell diameter.
std::pair<double, double> diameters(const SpacePartition& partition);

}  // namespace mps

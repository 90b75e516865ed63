#include "metricpoints/partition.hpp"

#include <algorithm>
#include <cmath>

namespace mps {

double inverse_cdf(const Cdf1d& phi, double t) { return phi.inverse_sup(t); }

SegmentPartition split_segment(const Cdf1d& nu0, const std::vector<long>& weights, long n) {
    if (weights.empty()) throw std::invalid_argument("split_segment: no weights");
    long sum = 0;
    for (long w : weights) {
        if (w < 0) throw std::invalid_argument("split_segment: negative weight");
        sum += w;
    }
    if (sum != n) throw std::invalid_argument("split_segment: weights must sum to n");

    SegmentPartition part;
    part.weights = weights;
    part.total_weight = n;
    const std::size_t k = weights.size();
    part.breakpoints.assign(k + 1, 0.0);
    part.masses.assign(k, 0.0);

    const double total = nu0.total();
    if (n == 0 || total <= 0.0) {
        // degenerate: everything in the first segment, the rest are {1}
        for (std::size_t j = 1; j <= k; ++j) part.breakpoints[j] = 1.0;
        return part;
    }

    long cum = 0;
    for (std::size_t j = 1; j <= k; ++j) {
        cum += weights[j - 1];
        double t = total * (static_cast<double>(cum) / static_cast<double>(n));
        double z = nu0.inverse_sup(std::min(t, total));
        part.breakpoints[j] = std::max(z, part.breakpoints[j - 1]);
    }
    part.breakpoints[k] = 1.0;  // inverse at full mass is the right edge
    for (std::size_t j = 0; j < k; ++j)
        part.masses[j] =
            std::max(0.0, nu0.value(part.breakpoints[j + 1]) - nu0.value(part.breakpoints[j]));
    return part;
}

std::string strategy_name(OccupancyStrategy s) {
    return s == OccupancyStrategy::Lexicographic ? "lexicographic" : "balanced";
}

std::string diameter_mode_name(DiameterMode m) {
    return m == DiameterMode::LipschitzBound ? "lipschitz-bound" : "measured-sampling";
}

namespace {

long ipow(long base, int exp) {
    long v = 1;
    for (int i = 0; i < exp; ++i) v *= base;
    return v;
}

int grid_order(long n, int dim) {
    int k = 1;
    while (ipow(k, dim) < n) ++k;
    return k;
}

// Spread `n` ones over the labels of the sub-grid fixed by `prefix`
// (row-major block of size k^(dim-level)), equalizing slice counts.
void fill_balanced(std::vector<std::uint8_t>& labels, long offset, int k, int dim, int level,
                   long n) {
    if (level == dim) {
        if (n > 0) labels[offset] = 1;
        return;
    }
    long block = ipow(k, dim - level - 1);
    long base = n / k, extra = n % k;
    for (int i = 0; i < k; ++i) {
        long share = base + (i < extra ? 1 : 0);
        fill_balanced(labels, offset + i * block, k, dim, level + 1, share);
    }
}

}  // namespace

Occupancy assign_occupancy(long n, int dim, OccupancyStrategy strategy) {
    if (n < 1) throw std::invalid_argument("assign_occupancy: n >= 1");
    if (dim < 1) throw std::invalid_argument("assign_occupancy: dim >= 1");
    Occupancy occ;
    occ.k = grid_order(n, dim);
    long cells = ipow(occ.k, dim);
    occ.labels.assign(cells, 0);
    if (strategy == OccupancyStrategy::Lexicographic) {
        for (long i = 0; i < n; ++i) occ.labels[i] = 1;
    } else {
        fill_balanced(occ.labels, 0, occ.k, dim, 0, n);
    }
    return occ;
}

double BoxPartition::avg_diameter() const {
    if (boxes.empty()) return 0.0;
    CompensatedSum acc;
    for (const auto& b : boxes) acc.add(b.euclid_diameter);
    return acc.value() / static_cast<double>(boxes.size());
}

double BoxPartition::max_diameter() const {
    double m = 0.0;
    for (const auto& b : boxes) m = std::max(m, b.euclid_diameter);
    return m;
}

double BoxPartition::diameter_bound() const {
    return dim * std::ldexp(1.0, dim - 1) *
           std::pow(static_cast<double>(n), -1.0 / static_cast<double>(dim));
}

BoxPartition build_box_partition(std::shared_ptr<const CubeMeasure> nu, long n,
                                 OccupancyStrategy strategy) {
    if (!nu) throw std::invalid_argument("build_box_partition: null measure");
    if (n < 1) throw std::invalid_argument("build_box_partition: n >= 1");
    const int d = nu->dim();
    Occupancy occ = assign_occupancy(n, d, strategy);
    const int k = occ.k;

    // hierarchical counts: counts[q] has k^q entries, counts[q][prefix]
    // summing the labels under that prefix
    std::vector<std::vector<long>> counts(d + 1);
    counts[d].assign(occ.labels.begin(), occ.labels.end());
    for (int q = d - 1; q >= 0; --q) {
        counts[q].assign(ipow(k, q), 0);
        for (long p = 0; p < static_cast<long>(counts[q].size()); ++p) {
            long s = 0;
            for (int i = 0; i < k; ++i) s += counts[q + 1][p * k + i];
            counts[q][p] = s;
        }
    }

    BoxPartition part;
    part.dim = d;
    part.k = k;
    part.n = n;
    part.strategy = strategy;
    part.measure = nu;
    part.levels.resize(d + 1);

    PartitionNode root;
    root.count = n;
    root.mass = 1.0;
    part.levels[0].push_back(root);

    for (int q = 0; q < d; ++q) {
        const auto& parents = part.levels[q];
        auto& children = part.levels[q + 1];
        children.reserve(parents.size() * k);
        for (const auto& parent : parents) {
            long flat = 0;
            for (int a = 0; a < q; ++a) flat = flat * k + (parent.prefix[a] - 1);
            std::vector<long> weights(k);
            for (int i = 0; i < k; ++i) weights[i] = counts[q + 1][flat * k + i];

            auto cdf = nu->conditional_cdf(parent.lo, parent.hi, q);
            SegmentPartition seg = split_segment(*cdf, weights, parent.count);

            for (int i = 0; i < k; ++i) {
                PartitionNode child;
                child.prefix = parent.prefix;
                child.prefix.push_back(i + 1);
                child.lo = parent.lo;
                child.hi = parent.hi;
                child.lo.push_back(seg.breakpoints[i]);
                child.hi.push_back(seg.breakpoints[i + 1]);
                child.count = weights[i];
                child.mass = seg.masses[i];
                children.push_back(std::move(child));
            }
        }
    }

    for (const auto& leaf : part.levels[d]) {
        if (leaf.count != 1) continue;
        BoxCell box;
        box.alpha = leaf.prefix;
        box.lo = leaf.lo;
        box.hi = leaf.hi;
        box.measure = leaf.mass;
        double s = 0.0;
        for (int a = 0; a < d; ++a) {
            double side = std::max(0.0, leaf.hi[a] - leaf.lo[a]);
            s += side * side;
        }
        box.euclid_diameter = std::sqrt(s);
        part.boxes.push_back(std::move(box));
    }
    return part;
}

double SpacePartition::avg_diameter() const {
    if (cells.empty()) return 0.0;
    CompensatedSum acc;
    for (const auto& c : cells) acc.add(c.diameter);
    return acc.value() / static_cast<double>(cells.size());
}

double SpacePartition::max_diameter() const {
    double m = 0.0;
    for (const auto& c : cells) m = std::max(m, c.diameter);
    return m;
}

SpacePartition pushforward_partition(std::shared_ptr<const Space> space,
                                     const BoxPartition& boxes, DiameterMode mode,
                                     const PushforwardOpts& opts) {
    if (!space) throw std::invalid_argument("pushforward_partition: null space");
    const ChartInfo* chart = space->chart();
    if (!chart) throw std::invalid_argument("pushforward_partition: space has no chart");
    if (chart->dim != boxes.dim)
        throw std::invalid_argument("pushforward_partition: chart/measure dimension mismatch");
    if (chart->base->description() != boxes.measure->description())
        throw std::invalid_argument("pushforward_partition: chart/measure mismatch");

    SpacePartition part;
    part.space = space;
    part.diameter_mode = mode;
    part.base_measure = boxes.measure;

    RngStream rng(opts.seed);
    for (const auto& box : boxes.boxes) {
        SpaceCell cell;
        cell.alpha = box.alpha;
        cell.lo = box.lo;
        cell.hi = box.hi;
        cell.measure = box.measure;
        if (mode == DiameterMode::LipschitzBound) {
            if (auto tight = space->box_cell_diameter(box.lo, box.hi)) {
                cell.diameter = *tight;
            } else if (chart->lipschitz) {
                cell.diameter = *chart->lipschitz * box.euclid_diameter;
            } else {
                throw PreconditionError(
                    "pushforward_partition: no Lipschitz constant; use measured mode");
            }
        } else {
            // sampled lower estimate of the image diameter
            std::vector<Point> pts;
            pts.reserve(opts.samples_per_cell);
            for (long s = 0; s < opts.samples_per_cell; ++s)
                pts.push_back(chart->map(boxes.measure->sample_in_box(box.lo, box.hi, rng)));
            double best = 0.0;
            for (std::size_t i = 0; i < pts.size(); ++i)
                for (std::size_t j = i + 1; j < pts.size(); ++j)
                    best = std::max(best, space->metric(pts[i], pts[j]));
            cell.diameter = best;
        }
        part.cells.push_back(std::move(cell));
    }
    return part;
}

SpacePartition equal_measure_partition(std::shared_ptr<const Space> space, long n,
                                       OccupancyStrategy strategy, DiameterMode mode,
                                       const PushforwardOpts& opts) {
    const ChartInfo* chart = space->chart();
    if (!chart) throw std::invalid_argument("equal_measure_partition: space has no chart");
    auto nu = std::shared_ptr<const CubeMeasure>(space, chart->base);  // aliasing ctor
    BoxPartition boxes = build_box_partition(nu, n, strategy);
    return pushforward_partition(space, boxes, mode, opts);
}

SpacePartition finite_partition(std::shared_ptr<const Space> space,
                                const std::vector<std::vector<std::size_t>>& groups) {
    if (!space || !space->finite())
        throw std::invalid_argument("finite_partition: needs a finite space");
    SpacePartition part;
    part.space = space;
    part.diameter_mode = DiameterMode::LipschitzBound;  // diameters are exact here
    std::vector<bool> seen(space->point_count(), false);
    for (const auto& group : groups) {
        SpaceCell cell;
        cell.indices = group;
        double mass = 0.0, diam = 0.0;
        for (std::size_t a = 0; a < group.size(); ++a) {
            if (group[a] >= seen.size() || seen[group[a]])
                throw std::invalid_argument("finite_partition: indices must partition the space");
            seen[group[a]] = true;
            mass += space->point_mass(group[a]);
            for (std::size_t b = a + 1; b < group.size(); ++b)
                diam = std::max(diam,
                                space->metric(space->point_at(group[a]), space->point_at(group[b])));
        }
        cell.measure = mass;
        cell.diameter = diam;
        part.cells.push_back(std::move(cell));
    }
    for (bool s : seen)
        if (!s) throw std::invalid_argument("finite_partition: indices must cover the space");
    return part;
}

std::pair<double, double> diameters(const SpacePartition& partition) {
    return {partition.avg_diameter(), partition.max_diameter()};
}

}  // namespace mps

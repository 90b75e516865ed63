#include "metricpoints/spaces.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <mutex>

namespace mps {

namespace {

constexpr double kHalfDiag2 = 0.70710678118654752440;  // sqrt(1/2)

double wrap_diff(double u) { return u - std::round(u); }

double sq(double x) { return x * x; }

/// Antiderivative of sqrt(r^2 - u^2).
double chord_integral(double u, double r) {
    u = std::clamp(u, -r, r);
    return 0.5 * (u * std::sqrt(std::max(0.0, r * r - u * u)) +
                  r * r * std::asin(std::clamp(u / r, -1.0, 1.0)));
}

/// Area of disk(center=(a,b), radius r) ∩ [0,1]^2, exact up to rounding.
double disk_rect_area(double a, double b, double r) {
    if (r <= 0.0) return 0.0;
    double x0 = std::max(0.0, a - r);
    double x1 = std::min(1.0, a + r);
    if (x1 <= x0) return 0.0;
    std::vector<double> cuts = {x0, x1};
    auto add_cut = [&](double f) {
        // |x - a| = sqrt(r^2 - f^2) marks where a horizontal edge enters/exits
        if (f < r) {
            double w = std::sqrt(r * r - f * f);
            cuts.push_back(a - w);
            cuts.push_back(a + w);
        }
    };
    add_cut(std::abs(1.0 - b));
    add_cut(std::abs(b));
    std::sort(cuts.begin(), cuts.end());
    double area = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double lo = std::max(cuts[i], x0), hi = std::min(cuts[i + 1], x1);
        if (hi <= lo) continue;
        double xm = 0.5 * (lo + hi);
        double gm = std::sqrt(std::max(0.0, r * r - sq(xm - a)));
        bool top_flat = b + gm >= 1.0;
        bool bottom_flat = b - gm <= 0.0;
        double w = hi - lo;
        double arc = chord_integral(hi - a, r) - chord_integral(lo - a, r);
        if (top_flat && bottom_flat)
            area += w;
        else if (top_flat)
            area += (1.0 - b) * w + arc;
        else if (bottom_flat)
            area += b * w + arc;
        else
            area += 2.0 * arc;
    }
    return area;
}

/// Area of disk(radius rho) ∩ [-1/2,1/2]^2 centered at the square center.
double disk_centered_square_area(double rho) {
    if (rho <= 0.0) return 0.0;
    if (rho >= kHalfDiag2) return 1.0;
    double area = M_PI * rho * rho;
    if (rho > 0.5) {
        double seg = rho * rho * std::acos(std::clamp(0.5 / rho, -1.0, 1.0)) -
                     0.5 * std::sqrt(std::max(0.0, rho * rho - 0.25));
        area -= 4.0 * seg;
    }
    return area;
}

/// Volume of {x in [-1/2,1/2]^3 : |x| <= r} (geodesic ball on the 3-torus).
double ball_centered_cube_volume(double r) {
    if (r <= 0.0) return 0.0;
    double l3 = std::sqrt(3.0) / 2.0;
    if (r >= l3) return 1.0;
    if (r <= 0.5) return 4.0 / 3.0 * M_PI * r * r * r;
    std::vector<double> hints;
    if (r > 0.5) hints.push_back(std::sqrt(r * r - 0.25));
    if (r > kHalfDiag2) hints.push_back(std::sqrt(r * r - 0.5));
    double half = integrate_segments(
        [&](double z) {
            return disk_centered_square_area(std::sqrt(std::max(0.0, r * r - z * z)));
        },
        0.0, std::min(r, 0.5), hints, 32);
    return 2.0 * half;
}

/// Overlap area of two disks of radius r with centers d apart.
double lens_area(double r, double d) {
    if (d >= 2.0 * r) return 0.0;
    if (d <= 0.0) return M_PI * r * r;
    return 2.0 * r * r * std::acos(std::clamp(d / (2.0 * r), -1.0, 1.0)) -
           0.5 * d * std::sqrt(std::max(0.0, 4.0 * r * r - d * d));
}

/// Spherical-cap intersection on the unit sphere (measure normalized to 1):
/// caps of angular radius r centered t apart.
double cap_intersection(double r, double t) {
    double v = 0.5 * (1.0 - std::cos(r));
    if (t <= 1e-12) return v;
    if (t >= 2.0 * r) return 0.0;
    if (t >= 2.0 * (M_PI - r)) return 2.0 * v - 1.0;
    auto integrand = [&](double psi) {
        double s = std::sin(psi);
        if (s < 1e-14) return psi < r ? 2.0 * M_PI * s : 0.0;
        double arg = (std::cos(r) - std::cos(psi) * std::cos(t)) / (s * std::sin(t));
        double phi = std::acos(std::clamp(arg, -1.0, 1.0));
        return 2.0 * phi * s;
    };
    double split = std::clamp(std::abs(r - t), 0.0, r);
    double integral = integrate_adaptive(integrand, 0.0, split, 1e-12) +
                      integrate_adaptive(integrand, split, r, 1e-12);
    return integral / (4.0 * M_PI);
}

}  // namespace

// ---------------------------------------------------------------------------
// Space base
// ---------------------------------------------------------------------------

void Space::validate_point(const Point& p) const {
    if (static_cast<int>(p.size()) != dim())
        throw std::domain_error(name() + ": point has wrong dimension");
    for (double c : p)
        if (!std::isfinite(c)) throw std::domain_error(name() + ": non-finite coordinate");
}

void Space::check_radius(double r) const {
    if (r < -1e-12 || r > diameter() + 1e-12)
        throw std::out_of_range(name() + ": radius outside [0, diameter]");
}

Estimate Space::ball_volume(const Point& y, double r, const BallVolumeOpts& opts) const {
    validate_point(y);
    check_radius(r);
    RngStream rng(opts.seed);
    long hits = 0;
    for (long i = 0; i < opts.samples; ++i)
        if (metric(y, sample(rng)) <= r) ++hits;
    double p = static_cast<double>(hits) / static_cast<double>(opts.samples);
    double se = std::sqrt(std::max(p * (1.0 - p), 1.0 / opts.samples) / opts.samples);
    return {p, se, "mc"};
}

std::size_t Space::point_count() const {
    throw UnsupportedError(name() + ": not a finite space");
}
Point Space::point_at(std::size_t) const {
    throw UnsupportedError(name() + ": not a finite space");
}
double Space::point_mass(std::size_t) const {
    throw UnsupportedError(name() + ": not a finite space");
}
std::optional<std::size_t> Space::index_of(const Point&) const { return std::nullopt; }

std::string provenance_name(Provenance p) {
    switch (p) {
        case Provenance::IidRandom: return "iid-random";
        case Provenance::PartitionCellRandom: return "partition-cell-random";
        case Provenance::PartitionCellCenter: return "partition-cell-center";
        case Provenance::Lattice: return "lattice";
        case Provenance::User: return "user";
    }
    return "user";
}

// ---------------------------------------------------------------------------
// Circle (circumference 1, geodesic metric)
// ---------------------------------------------------------------------------

class Circle final : public Space {
public:
    Circle() {
        base_ = std::make_shared<CubeMeasure>(CubeMeasure::uniform(1));
        chart_.dim = 1;
        chart_.lipschitz = 1.0;
        chart_.base = base_.get();
        chart_.map = [](std::span<const double> z) {
            double x = z[0] - std::floor(z[0]);
            return Point{x == 1.0 ? 0.0 : x};
        };
    }

    std::string name() const override { return "circle"; }
    int dim() const override { return 1; }
    double diameter() const override { return 0.5; }
    MeasureKind measure_kind() const override { return MeasureKind::ClosedForm; }
    bool distance_invariant() const override { return true; }

    void validate_point(const Point& p) const override {
        Space::validate_point(p);
        if (p[0] < 0.0 || p[0] >= 1.0) throw std::domain_error("circle: coordinate outside [0,1)");
    }

    double metric(const Point& x, const Point& y) const override {
        if (x.size() != 1 || y.size() != 1 || !(x[0] >= 0.0 && x[0] < 1.0) ||
            !(y[0] >= 0.0 && y[0] < 1.0))
            throw std::domain_error("circle: coordinate outside [0,1)");
        return std::abs(wrap_diff(x[0] - y[0]));
    }

    Estimate ball_volume(const Point& y, double r, const BallVolumeOpts&) const override {
        validate_point(y);
        check_radius(r);
        return {std::min(2.0 * r, 1.0), 0.0, "closed-form"};
    }

    Point sample(RngStream& rng) const override { return {rng.uniform()}; }

    const ChartInfo* chart() const override { return &chart_; }

    std::optional<double> mean_distance_closed() const override { return 0.25; }

    std::optional<double> symdiff_r_closed(const Point& y1, const Point& y2,
                                           double r) const override {
        double t = metric(y1, y2);
        return 4.0 * r - 2.0 * std::max(0.0, 2.0 * r - t) -
               2.0 * std::max(0.0, 2.0 * r - (1.0 - t));
    }

    std::optional<double> box_cell_diameter(std::span<const double> lo,
                                            std::span<const double> hi) const override {
        return std::min(std::max(0.0, hi[0] - lo[0]), 0.5);
    }

    std::vector<double> symdiff_breakpoints(const Point& y1, const Point& y2) const override {
        double t = metric(y1, y2);
        return {0.5 * t, 0.5 * (1.0 - t)};
    }

private:
    std::shared_ptr<CubeMeasure> base_;
    ChartInfo chart_;
};

// ---------------------------------------------------------------------------
// Flat torus R^d / Z^d, d in {1,2,3}
// ---------------------------------------------------------------------------

class Torus final : public Space {
public:
    explicit Torus(int d) : d_(d) {
        if (d < 1 || d > 3) throw ConfigError("torus: dim must be 1, 2 or 3");
        base_ = std::make_shared<CubeMeasure>(CubeMeasure::uniform(d));
        chart_.dim = d;
        chart_.lipschitz = 1.0;
        chart_.base = base_.get();
        chart_.map = [d](std::span<const double> z) {
            Point p(d);
            for (int a = 0; a < d; ++a) {
                double x = z[a] - std::floor(z[a]);
                p[a] = x == 1.0 ? 0.0 : x;
            }
            return p;
        };
    }

    std::string name() const override { return "torus" + std::to_string(d_); }
    int dim() const override { return d_; }
    double diameter() const override { return 0.5 * std::sqrt(static_cast<double>(d_)); }
    MeasureKind measure_kind() const override { return MeasureKind::ClosedForm; }
    bool distance_invariant() const override { return true; }

    void validate_point(const Point& p) const override {
        Space::validate_point(p);
        for (double c : p)
            if (c < 0.0 || c >= 1.0) throw std::domain_error("torus: coordinate outside [0,1)");
    }

    double metric(const Point& x, const Point& y) const override {
        if (static_cast<int>(x.size()) != d_ || static_cast<int>(y.size()) != d_)
            throw std::domain_error("torus: point has wrong dimension");
        double s = 0.0;
        for (int a = 0; a < d_; ++a) {
            if (!(x[a] >= 0.0 && x[a] < 1.0) || !(y[a] >= 0.0 && y[a] < 1.0))
                throw std::domain_error("torus: coordinate outside [0,1)");
            s += sq(wrap_diff(x[a] - y[a]));
        }
        return std::sqrt(s);
    }

    Estimate ball_volume(const Point& y, double r, const BallVolumeOpts&) const override {
        validate_point(y);
        check_radius(r);
        double v = 0.0;
        switch (d_) {
            case 1: v = std::min(2.0 * r, 1.0); break;
            case 2: v = disk_centered_square_area(r); break;
            case 3: v = ball_centered_cube_volume(r); break;
        }
        return {v, 0.0, d_ == 3 ? "quadrature" : "closed-form"};
    }

    Point sample(RngStream& rng) const override {
        Point p(d_);
        for (int a = 0; a < d_; ++a) p[a] = rng.uniform();
        return p;
    }

    const ChartInfo* chart() const override { return &chart_; }

    std::optional<double> mean_distance_closed() const override {
        if (d_ == 1) return 0.25;
        static std::mutex mu;
        static double cache[4] = {0, 0, 0, 0};
        std::lock_guard<std::mutex> lock(mu);
        if (cache[d_] == 0.0) {
            // distance of a uniform pair: per-axis wrapped offsets are
            // uniform on [0, 1/2] with density 2
            if (d_ == 2) {
                cache[2] = integrate_gauss(
                    [](double u) {
                        return 2.0 * integrate_gauss(
                                         [u](double v) {
                                             return 2.0 * std::sqrt(u * u + v * v);
                                         },
                                         0.0, 0.5, 64);
                    },
                    0.0, 0.5, 64);
            } else {
                cache[3] = integrate_gauss(
                    [](double u) {
                        return 2.0 * integrate_gauss(
                                         [u](double v) {
                                             return 2.0 * integrate_gauss(
                                                              [u, v](double w) {
                                                                  return 2.0 *
                                                                         std::sqrt(u * u + v * v +
                                                                                   w * w);
                                                              },
                                                              0.0, 0.5, 48);
                                         },
                                         0.0, 0.5, 48);
                    },
                    0.0, 0.5, 48);
            }
        }
        return cache[d_];
    }

    std::optional<double> symdiff_r_closed(const Point& y1, const Point& y2,
                                           double r) const override {
        if (d_ == 1) {
            double t = metric(y1, y2);
            return 4.0 * r - 2.0 * std::max(0.0, 2.0 * r - t) -
                   2.0 * std::max(0.0, 2.0 * r - (1.0 - t));
        }
        if (d_ == 2 && r <= 0.5) {
            // balls are embedded disks; the overlap is a sum of lens areas
            // over the nine nearest lattice translates
            double w0 = wrap_diff(y1[0] - y2[0]);
            double w1 = wrap_diff(y1[1] - y2[1]);
            double overlap = 0.0;
            for (int nx = -1; nx <= 1; ++nx)
                for (int ny = -1; ny <= 1; ++ny)
                    overlap += lens_area(r, std::hypot(w0 + nx, w1 + ny));
            double v = M_PI * r * r;
            return 2.0 * (v - overlap);
        }
        return std::nullopt;
    }

    std::optional<double> box_cell_diameter(std::span<const double> lo,
                                            std::span<const double> hi) const override {
        double s = 0.0;
        for (int a = 0; a < d_; ++a) s += sq(std::min(std::max(0.0, hi[a] - lo[a]), 0.5));
        return std::sqrt(s);
    }

    std::vector<double> volume_breakpoints(const Point&) const override {
        if (d_ == 1) return {};
        if (d_ == 2) return {0.5};
        return {0.5, kHalfDiag2};
    }

    std::vector<double> symdiff_breakpoints(const Point& y1, const Point& y2) const override {
        if (d_ == 1) {
            double t = metric(y1, y2);
            return {0.5 * t, 0.5 * (1.0 - t)};
        }
        // the ball overlap gains a lens whenever 2r reaches a lattice
        // translate of the center offset
        std::vector<double> out = volume_breakpoints(y1);
        if (d_ == 2) {
            double w0 = wrap_diff(y1[0] - y2[0]);
            double w1 = wrap_diff(y1[1] - y2[1]);
            for (int nx = -1; nx <= 1; ++nx)
                for (int ny = -1; ny <= 1; ++ny)
                    out.push_back(0.5 * std::hypot(w0 + nx, w1 + ny));
        } else {
            out.push_back(0.5 * metric(y1, y2));
        }
        return out;
    }

private:
    int d_;
    std::shared_ptr<CubeMeasure> base_;
    ChartInfo chart_;
};

// ---------------------------------------------------------------------------
// Unit cube with the Euclidean metric (not distance-invariant)
// ---------------------------------------------------------------------------

class Cube final : public Space {
public:
    Cube(int d, CubeMeasure measure) : d_(d) {
        if (d < 1 || d > 3) throw ConfigError("cube: dim must be 1, 2 or 3");
        base_ = std::make_shared<CubeMeasure>(std::move(measure));
        uniform_ = base_->kind() == CubeMeasure::Kind::Uniform;
        chart_.dim = d;
        chart_.lipschitz = 1.0;
        chart_.base = base_.get();
        chart_.map = [](std::span<const double> z) { return Point(z.begin(), z.end()); };
    }

    std::string name() const override {
        std::string n = "cube" + std::to_string(d_);
        if (!uniform_) n += "[" + base_->description() + "]";
        return n;
    }
    int dim() const override { return d_; }
    double diameter() const override { return std::sqrt(static_cast<double>(d_)); }
    MeasureKind measure_kind() const override {
        return uniform_ ? MeasureKind::ClosedForm : MeasureKind::Sampled;
    }
    bool distance_invariant() const override { return false; }

    void validate_point(const Point& p) const override {
        Space::validate_point(p);
        for (double c : p)
            if (c < 0.0 || c > 1.0) throw std::domain_error("cube: coordinate outside [0,1]");
    }

    double metric(const Point& x, const Point& y) const override {
        if (static_cast<int>(x.size()) != d_ || static_cast<int>(y.size()) != d_)
            throw std::domain_error("cube: point has wrong dimension");
        double s = 0.0;
        for (int a = 0; a < d_; ++a) {
            if (!(x[a] >= 0.0 && x[a] <= 1.0) || !(y[a] >= 0.0 && y[a] <= 1.0))
                throw std::domain_error("cube: coordinate outside [0,1]");
            s += sq(x[a] - y[a]);
        }
        return std::sqrt(s);
    }

    Estimate ball_volume(const Point& y, double r, const BallVolumeOpts& opts) const override {
        validate_point(y);
        check_radius(r);
        if (!uniform_) return Space::ball_volume(y, r, opts);
        switch (d_) {
            case 1:
                return {std::max(0.0, std::min(y[0] + r, 1.0) - std::max(y[0] - r, 0.0)), 0.0,
                        "closed-form"};
            case 2:
                return {disk_rect_area(y[0], y[1], r), 0.0, "closed-form"};
            default: {
                // slice the ball along the last axis; each slice is a
                // disk-rectangle intersection
                double z0 = std::max(0.0, y[2] - r), z1 = std::min(1.0, y[2] + r);
                std::vector<double> hints;
                for (double f : planar_features(y))
                    if (f < r) {
                        double w = std::sqrt(r * r - f * f);
                        hints.push_back(y[2] - w);
                        hints.push_back(y[2] + w);
                    }
                double v = integrate_segments(
                    [&](double z) {
                        double rho = std::sqrt(std::max(0.0, r * r - sq(z - y[2])));
                        return disk_rect_area(y[0], y[1], rho);
                    },
                    z0, z1, hints, 24);
                return {v, 0.0, "quadrature"};
            }
        }
    }

    Point sample(RngStream& rng) const override { return base_->sample(rng); }

    const ChartInfo* chart() const override { return &chart_; }

    std::optional<double> mean_distance_closed() const override {
        if (!uniform_) return std::nullopt;
        if (d_ == 1) return 1.0 / 3.0;
        static std::mutex mu;
        static double cache[4] = {0, 0, 0, 0};
        std::lock_guard<std::mutex> lock(mu);
        if (cache[d_] == 0.0) {
            // per-axis offsets of a uniform pair have density 2(1-u)
            if (d_ == 2) {
                cache[2] = integrate_gauss(
                    [](double u) {
                        return 2.0 * (1.0 - u) *
                               integrate_gauss(
                                   [u](double v) {
                                       return 2.0 * (1.0 - v) * std::sqrt(u * u + v * v);
                                   },
                                   0.0, 1.0, 64);
                    },
                    0.0, 1.0, 64);
            } else {
                cache[3] = integrate_gauss(
                    [](double u) {
                        return 2.0 * (1.0 - u) *
                               integrate_gauss(
                                   [u](double v) {
                                       return 2.0 * (1.0 - v) *
                                              integrate_gauss(
                                                  [u, v](double w) {
                                                      return 2.0 * (1.0 - w) *
                                                             std::sqrt(u * u + v * v + w * w);
                                                  },
                                                  0.0, 1.0, 48);
                                   },
                                   0.0, 1.0, 48);
                    },
                    0.0, 1.0, 48);
            }
        }
        return cache[d_];
    }

    std::optional<double> box_cell_diameter(std::span<const double> lo,
                                            std::span<const double> hi) const override {
        double s = 0.0;
        for (int a = 0; a < d_; ++a) s += sq(std::max(0.0, hi[a] - lo[a]));
        return std::sqrt(s);
    }

    std::vector<double> volume_breakpoints(const Point& y) const override {
        if (!uniform_) return {};
        // distances from y to the faces, edges and corners of the cube
        std::vector<double> out;
        std::vector<std::vector<double>> axis_offsets(d_);
        for (int a = 0; a < d_; ++a) axis_offsets[a] = {y[a], 1.0 - y[a]};
        int combos = 1;
        for (int a = 0; a < d_; ++a) combos *= 3;  // skip / lo / hi per axis
        for (int c = 1; c < combos; ++c) {
            int code = c;
            double s = 0.0;
            for (int a = 0; a < d_; ++a) {
                int pick = code % 3;
                code /= 3;
                if (pick > 0) s += sq(axis_offsets[a][pick - 1]);
            }
            out.push_back(std::sqrt(s));
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    const CubeMeasure& measure() const { return *base_; }

private:
    std::vector<double> planar_features(const Point& y) const {
        // feature radii of the 2-d slice problem at the center height
        std::vector<double> f = {y[0], 1.0 - y[0], y[1], 1.0 - y[1]};
        for (double dx : {y[0], 1.0 - y[0]})
            for (double dy : {y[1], 1.0 - y[1]}) f.push_back(std::hypot(dx, dy));
        return f;
    }

    int d_;
    std::shared_ptr<CubeMeasure> base_;
    bool uniform_;
    ChartInfo chart_;
};

// ---------------------------------------------------------------------------
// Hamming cube {0,1}^n
// ---------------------------------------------------------------------------

class Hamming final : public Space {
public:
    explicit Hamming(int n) : n_(n) {
        if (n < 1 || n > 10) throw ConfigError("hamming: n must be in 1..10");
        // cumulative binomial ball volumes (dyadic, exact in doubles)
        double denom = std::ldexp(1.0, -n);
        double c = 1.0;
        cum_.push_back(denom);
        for (int k = 1; k <= n; ++k) {
            c = c * (n - k + 1) / k;
            cum_.push_back(cum_.back() + c * denom);
        }
    }

    std::string name() const override { return "hamming" + std::to_string(n_); }
    int dim() const override { return n_; }
    double diameter() const override { return static_cast<double>(n_); }
    MeasureKind measure_kind() const override { return MeasureKind::ExactFinite; }
    bool distance_invariant() const override { return true; }

    void validate_point(const Point& p) const override {
        Space::validate_point(p);
        for (double c : p)
            if (c != 0.0 && c != 1.0) throw std::domain_error("hamming: coordinates must be bits");
    }

    double metric(const Point& x, const Point& y) const override {
        if (static_cast<int>(x.size()) != n_ || static_cast<int>(y.size()) != n_)
            throw std::domain_error("hamming: point has wrong dimension");
        int d = 0;
        for (int a = 0; a < n_; ++a) {
            if ((x[a] != 0.0 && x[a] != 1.0) || (y[a] != 0.0 && y[a] != 1.0))
                throw std::domain_error("hamming: coordinates must be bits");
            d += (x[a] != y[a]);
        }
        return static_cast<double>(d);
    }

    Estimate ball_volume(const Point& y, double r, const BallVolumeOpts&) const override {
        validate_point(y);
        check_radius(r);
        int k = std::min(n_, static_cast<int>(std::floor(r + 1e-12)));
        if (k < 0) return {0.0, 0.0, "exact"};
        return {cum_[k], 0.0, "exact"};
    }

    Point sample(RngStream& rng) const override {
        return point_at(rng.uniform_index(1ull << n_));
    }

    std::vector<double> radii_set() const override {
        std::vector<double> t(n_ + 1);
        for (int k = 0; k <= n_; ++k) t[k] = k;
        return t;
    }

    bool finite() const override { return true; }
    std::size_t point_count() const override { return std::size_t(1) << n_; }
    Point point_at(std::size_t i) const override {
        Point p(n_);
        for (int a = 0; a < n_; ++a) p[a] = (i >> a) & 1u;
        return p;
    }
    double point_mass(std::size_t) const override { return std::ldexp(1.0, -n_); }
    std::optional<std::size_t> index_of(const Point& p) const override {
        std::size_t i = 0;
        for (int a = 0; a < n_; ++a)
            if (p[a] != 0.0) i |= std::size_t(1) << a;
        return i;
    }

    std::optional<ExactFiniteSpace> exact() const override {
        if (n_ > 8) return std::nullopt;  // keep the exact tables small
        ExactFiniteSpace ex;
        std::size_t m = point_count();
        ex.masses.assign(m, Rat(1, std::int64_t(1) << n_));
        ex.dist.assign(m, std::vector<Rat>(m));
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j)
                ex.dist[i][j] = Rat(std::popcount(i ^ j));
        for (int k = 0; k <= n_; ++k) ex.radii.push_back(Rat(k));
        ex.diameter = Rat(n_);
        return ex;
    }

    std::optional<double> mean_distance_closed() const override { return 0.5 * n_; }

private:
    int n_;
    std::vector<double> cum_;
};

// ---------------------------------------------------------------------------
// Unit sphere S^2 with the geodesic metric
// ---------------------------------------------------------------------------

class Sphere2 final : public Space {
public:
    Sphere2() {
        base_ = std::make_shared<CubeMeasure>(CubeMeasure::uniform(2));
        chart_.dim = 2;
        chart_.lipschitz = std::nullopt;  // cylindrical equal-area map: unbounded at the poles
        chart_.base = base_.get();
        chart_.map = [](std::span<const double> z) {
            double theta = 2.0 * M_PI * z[0];
            double h = std::clamp(2.0 * z[1] - 1.0, -1.0, 1.0);
            double s = std::sqrt(std::max(0.0, 1.0 - h * h));
            return Point{s * std::cos(theta), s * std::sin(theta), h};
        };
    }

    std::string name() const override { return "sphere2"; }
    int dim() const override { return 2; }
    double diameter() const override { return M_PI; }
    MeasureKind measure_kind() const override { return MeasureKind::ClosedForm; }
    bool distance_invariant() const override { return true; }

    void validate_point(const Point& p) const override {
        if (p.size() != 3) throw std::domain_error("sphere2: points are unit 3-vectors");
        double n = std::sqrt(sq(p[0]) + sq(p[1]) + sq(p[2]));
        if (std::abs(n - 1.0) > 1e-9) throw std::domain_error("sphere2: point not on the sphere");
    }

    double metric(const Point& x, const Point& y) const override {
        if (x.size() != 3 || y.size() != 3)
            throw std::domain_error("sphere2: points are unit 3-vectors");
        double nx = sq(x[0]) + sq(x[1]) + sq(x[2]);
        double ny = sq(y[0]) + sq(y[1]) + sq(y[2]);
        if (std::abs(nx - 1.0) > 2e-9 || std::abs(ny - 1.0) > 2e-9)
            throw std::domain_error("sphere2: point not on the sphere");
        double dot = x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
        return std::acos(std::clamp(dot, -1.0, 1.0));
    }

    Estimate ball_volume(const Point& y, double r, const BallVolumeOpts&) const override {
        validate_point(y);
        check_radius(r);
        return {0.5 * (1.0 - std::cos(r)), 0.0, "closed-form"};
    }

    Point sample(RngStream& rng) const override {
        double z[2] = {rng.uniform(), rng.uniform()};
        return chart_.map(std::span<const double>(z, 2));
    }

    const ChartInfo* chart() const override { return &chart_; }

    std::optional<double> mean_distance_closed() const override { return M_PI / 2.0; }

    std::optional<double> symdiff_r_closed(const Point& y1, const Point& y2,
                                           double r) const override {
        double v = 0.5 * (1.0 - std::cos(r));
        return 2.0 * (v - cap_intersection(r, metric(y1, y2)));
    }

    std::vector<double> symdiff_breakpoints(const Point& y1, const Point& y2) const override {
        double t = metric(y1, y2);
        return {0.5 * t, M_PI - 0.5 * t};
    }

private:
    std::shared_ptr<CubeMeasure> base_;
    ChartInfo chart_;
};

// ---------------------------------------------------------------------------
// Generic finite point list with explicit rational metric and masses
// ---------------------------------------------------------------------------

class FinitePoints final : public Space {
public:
    FinitePoints(std::string name, std::vector<Rat> masses, std::vector<std::vector<Rat>> dist)
        : name_(std::move(name)), exact_{std::move(masses), std::move(dist), {}, 0} {
        std::size_t m = exact_.masses.size();
        if (exact_.dist.size() != m) throw ConfigError("finite space: matrix size mismatch");
        dist_.assign(m, std::vector<double>(m));
        mass_.assign(m, 0.0);
        cum_.assign(m, 0.0);
        double acc = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            mass_[i] = to_double(exact_.masses[i]);
            acc += mass_[i];
            cum_[i] = acc;
            for (std::size_t j = 0; j < m; ++j) {
                dist_[i][j] = to_double(exact_.dist[i][j]);
                if (exact_.dist[i][j] > exact_.diameter) exact_.diameter = exact_.dist[i][j];
            }
        }
        std::vector<Rat> rad;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) rad.push_back(exact_.dist[i][j]);
        std::sort(rad.begin(), rad.end());
        rad.erase(std::unique(rad.begin(), rad.end()), rad.end());
        exact_.radii = std::move(rad);
        // distance-invariant iff every center sees the same volume profile
        invariant_ = true;
        for (const Rat& r : exact_.radii) {
            Rat v0 = exact_volume(0, r);
            for (std::size_t y = 1; y < m && invariant_; ++y)
                if (exact_volume(y, r) != v0) invariant_ = false;
        }
    }

    std::string name() const override { return name_; }
    int dim() const override { return 0; }
    double diameter() const override { return to_double(exact_.diameter); }
    MeasureKind measure_kind() const override { return MeasureKind::ExactFinite; }
    bool distance_invariant() const override { return invariant_; }

    void validate_point(const Point& p) const override {
        if (p.size() != 1 || p[0] != std::floor(p[0]) || p[0] < 0.0 ||
            p[0] >= static_cast<double>(mass_.size()))
            throw std::domain_error(name_ + ": point must be an index");
    }

    double metric(const Point& x, const Point& y) const override {
        validate_point(x);
        validate_point(y);
        return dist_[static_cast<std::size_t>(x[0])][static_cast<std::size_t>(y[0])];
    }

    Estimate ball_volume(const Point& y, double r, const BallVolumeOpts&) const override {
        validate_point(y);
        check_radius(r);
        std::size_t yi = static_cast<std::size_t>(y[0]);
        double v = 0.0;
        for (std::size_t i = 0; i < mass_.size(); ++i)
            if (dist_[yi][i] <= r + 1e-12) v += mass_[i];
        return {v, 0.0, "exact"};
    }

    Point sample(RngStream& rng) const override {
        double u = rng.uniform();
        auto it = std::lower_bound(cum_.begin(), cum_.end(), u);
        std::size_t i = std::min<std::size_t>(it - cum_.begin(), mass_.size() - 1);
        return {static_cast<double>(i)};
    }

    std::vector<double> radii_set() const override {
        std::vector<double> t;
        for (const Rat& r : exact_.radii) t.push_back(to_double(r));
        return t;
    }

    bool finite() const override { return true; }
    std::size_t point_count() const override { return mass_.size(); }
    Point point_at(std::size_t i) const override { return {static_cast<double>(i)}; }
    double point_mass(std::size_t i) const override { return mass_[i]; }
    std::optional<std::size_t> index_of(const Point& p) const override {
        validate_point(p);
        return static_cast<std::size_t>(p[0]);
    }
    std::optional<ExactFiniteSpace> exact() const override { return exact_; }

private:
    Rat exact_volume(std::size_t y, const Rat& r) const {
        Rat v = 0;
        for (std::size_t i = 0; i < exact_.masses.size(); ++i)
            if (exact_.dist[y][i] <= r) v += exact_.masses[i];
        return v;
    }

    std::string name_;
    ExactFiniteSpace exact_;
    std::vector<std::vector<double>> dist_;
    std::vector<double> mass_, cum_;
    bool invariant_ = false;
};

std::shared_ptr<const Space> make_finite_space(std::string name, std::vector<Rat> masses,
                                               std::vector<std::vector<Rat>> dist) {
    const std::size_t m = masses.size();
    if (dist.size() != m) throw ConfigError("finite space: matrix size mismatch");
    Rat total = 0;
    for (const Rat& w : masses) {
        if (w < 0) throw ConfigError("finite space: negative mass");
        total += w;
    }
    if (total != 1) throw ConfigError("finite space: masses must sum to 1");
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            if (dist[i][j] != dist[j][i] || dist[i][j] < 0 || (dist[i][j] == 0) != (i == j))
                throw ConfigError("finite space: not a metric");
            for (std::size_t k = 0; k < m; ++k)
                if (dist[i][j] > dist[i][k] + dist[k][j])
                    throw ConfigError("finite space: triangle inequality fails");
        }
    return std::make_shared<FinitePoints>(std::move(name), std::move(masses), std::move(dist));
}

namespace {

std::shared_ptr<const Space> make_path6() {
    // six equally weighted points on a segment, metric |i-j|/5
    std::size_t m = 6;
    std::vector<Rat> masses(m, Rat(1, 6));
    std::vector<std::vector<Rat>> dist(m, std::vector<Rat>(m));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            dist[i][j] = Rat(std::int64_t(i > j ? i - j : j - i), 5);
    return std::make_shared<FinitePoints>("path6", std::move(masses), std::move(dist));
}

}  // namespace

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

std::shared_ptr<const Space> make_space(const SpaceSpec& spec) {
    const std::string& n = spec.name;
    auto want_uniform = [&]() {
        if (!spec.density.empty() && spec.density != "uniform")
            throw ConfigError("space '" + n + "' does not take a density");
    };
    if (n == "circle") {
        want_uniform();
        return std::make_shared<Circle>();
    }
    if (n.rfind("torus", 0) == 0 && n.size() == 6) {
        want_uniform();
        return std::make_shared<Torus>(n[5] - '0');
    }
    if (n.rfind("cube", 0) == 0 && n.size() == 5) {
        int d = n[4] - '0';
        if (d < 1 || d > 3) throw ConfigError("cube: dim must be 1, 2 or 3");
        return std::make_shared<Cube>(d, CubeMeasure::named(spec.density, d));
    }
    if (n.rfind("hamming", 0) == 0) {
        want_uniform();
        int bits = std::atoi(n.c_str() + 7);
        return std::make_shared<Hamming>(bits);
    }
    if (n == "sphere2") {
        want_uniform();
        return std::make_shared<Sphere2>();
    }
    if (n == "path6") {
        want_uniform();
        return make_path6();
    }
    throw ConfigError("unknown space: " + n);
}

std::shared_ptr<const Space> make_space(const std::string& name) {
    return make_space(SpaceSpec{name, ""});
}

std::vector<SpaceInfo> list_spaces() {
    std::vector<SpaceInfo> out;
    std::vector<std::string> names = {"circle", "torus1", "torus2",   "torus3",
                                      "cube1",  "cube2",  "cube3",    "hamming2",
                                      "hamming3", "hamming4", "hamming5", "sphere2",
                                      "path6"};
    for (const auto& n : names) {
        auto s = make_space(n);
        out.push_back({s->name(), s->dim(), s->diameter(), s->measure_kind(),
                       s->distance_invariant(), s->chart() != nullptr});
    }
    return out;
}

RadialMeasure default_xi(const Space& space) {
    auto radii = space.radii_set();
    if (!radii.empty()) return RadialMeasure::uniform_atomic(std::move(radii));
    return RadialMeasure::lebesgue(0.0, space.diameter());
}

Point canonical_point(const Space& space) {
    if (space.finite()) return space.point_at(0);
    if (const ChartInfo* chart = space.chart()) {
        std::vector<double> mid(chart->dim, 0.5);
        return chart->map(mid);
    }
    RngStream rng(1);
    return space.sample(rng);
}

Estimate mean_distance(const Space& space, const MeanDistanceOpts& opts) {
    using Mode = MeanDistanceOpts::Mode;
    Mode mode = opts.mode;
    if (mode == Mode::Auto) {
        if (space.finite())
            mode = Mode::Exact;
        else if (space.mean_distance_closed())
            mode = Mode::ClosedForm;
        else
            mode = Mode::MonteCarlo;
    }
    switch (mode) {
        case Mode::Exact: {
            if (!space.finite())
                throw UnsupportedError("mean_distance: exact mode needs a finite space");
            CompensatedSum acc;
            std::size_t m = space.point_count();
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < m; ++j)
                    acc.add(space.point_mass(i) * space.point_mass(j) *
                            space.metric(space.point_at(i), space.point_at(j)));
            return {acc.value(), 0.0, "exact"};
        }
        case Mode::ClosedForm: {
            auto v = space.mean_distance_closed();
            if (!v) throw UnsupportedError("mean_distance: no registered closed form");
            return {*v, 0.0, "closed-form"};
        }
        default: {
            RngStream rng(opts.seed);
            RunningStats stats;
            for (long i = 0; i < opts.samples; ++i)
                stats.add(space.metric(space.sample(rng), space.sample(rng)));
            return {stats.mean(), stats.stderr_of_mean(), "mc"};
        }
    }
}

PointSet sample_iid(const Space& space, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample_iid: n >= 1");
    PointSet ps;
    ps.space_name = space.name();
    ps.provenance = Provenance::IidRandom;
    ps.seed = seed;
    RngStream rng(seed);
    for (std::size_t i = 0; i < n; ++i) ps.points.push_back(space.sample(rng));
    return ps;
}

PointSet lattice_points(const Space& space, std::size_t n) {
    if (n < 1) throw std::invalid_argument("lattice_points: n >= 1");
    PointSet ps;
    ps.space_name = space.name();
    ps.provenance = Provenance::Lattice;
    if (space.name() == "circle") {
        for (std::size_t i = 0; i < n; ++i)
            ps.points.push_back({static_cast<double>(i) / static_cast<double>(n)});
        return ps;
    }
    if (space.finite()) {
        std::size_t m = space.point_count();
        for (std::size_t i = 0; i < n; ++i) ps.points.push_back(space.point_at(i % m));
        return ps;
    }
    const ChartInfo* chart = space.chart();
    if (!chart) throw UnsupportedError("lattice_points: no chart for " + space.name());
    int d = chart->dim;
    std::size_t k = 1;
    while (static_cast<double>(std::pow(static_cast<double>(k), d)) + 0.5 < static_cast<double>(n))
        ++k;
    std::vector<std::size_t> idx(d, 0);
    for (std::size_t count = 0; count < n; ++count) {
        std::vector<double> z(d);
        for (int a = 0; a < d; ++a) z[a] = (static_cast<double>(idx[a]) + 0.5) / k;
        ps.points.push_back(chart->map(z));
        int a = d - 1;
        while (a >= 0 && ++idx[a] == k) idx[a--] = 0;
    }
    return ps;
}

}  // namespace mps

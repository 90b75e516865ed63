#include "metricpoints/measures.hpp"

#include <algorithm>
#include <cmath>

namespace mps {

// ---------------------------------------------------------------------------
// Cdf1d
// ---------------------------------------------------------------------------

double Cdf1d::inverse_sup(double t) const {
    const double mass = total();
    if (t < -1e-12 || t > mass + 1e-12)
        throw std::out_of_range("inverse_sup: t outside [0, total mass]");
    t = std::clamp(t, 0.0, mass);
    const double slack = value_tolerance();
    if (value(1.0) <= t + slack) return 1.0;
    // Invariant: value(lo) <= t < value(hi).  For a continuous distribution
    // function the limit point is the rightmost preimage of t; evaluation
    // noise below `slack` counts as equality so plateaus are not cut short.
    double lo = 0.0, hi = 1.0;
    if (value(0.0) > t + slack) return 0.0;
    while (hi - lo > 1e-12) {
        double mid = 0.5 * (lo + hi);
        if (value(mid) > t + slack)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

PowerCdf::PowerCdf(double p, double mass) : p_(p), mass_(mass) {
    if (!(p > 0.0) || mass < 0.0) throw std::invalid_argument("PowerCdf: need p > 0, mass >= 0");
}

double PowerCdf::value(double z) const {
    z = std::clamp(z, 0.0, 1.0);
    return mass_ * std::pow(z, p_);
}

double PowerCdf::inverse_sup(double t) const {
    if (t < -1e-12 || t > mass_ + 1e-12)
        throw std::out_of_range("inverse_sup: t outside [0, total mass]");
    if (mass_ == 0.0) return 1.0;  // identically zero: everything maps to the right edge
    t = std::clamp(t, 0.0, mass_);
    return std::pow(t / mass_, 1.0 / p_);
}

PiecewiseLinearCdf::PiecewiseLinearCdf(std::vector<double> z, std::vector<double> f)
    : z_(std::move(z)), f_(std::move(f)) {
    if (z_.size() != f_.size() || z_.size() < 2)
        throw std::invalid_argument("PiecewiseLinearCdf: need matching knot arrays");
    if (z_.front() != 0.0 || z_.back() != 1.0 || f_.front() != 0.0)
        throw std::invalid_argument("PiecewiseLinearCdf: knots must span [0,1] with F(0)=0");
    for (std::size_t i = 1; i < z_.size(); ++i)
        if (z_[i] < z_[i - 1] || f_[i] < f_[i - 1])
            throw std::invalid_argument("PiecewiseLinearCdf: knots must be non-decreasing");
}

double PiecewiseLinearCdf::value(double z) const {
    z = std::clamp(z, 0.0, 1.0);
    auto it = std::upper_bound(z_.begin(), z_.end(), z);
    if (it == z_.begin()) return f_.front();
    std::size_t i = static_cast<std::size_t>(it - z_.begin()) - 1;
    if (i + 1 >= z_.size()) return f_.back();
    double dz = z_[i + 1] - z_[i];
    if (dz == 0.0) return f_[i + 1];
    return f_[i] + (f_[i + 1] - f_[i]) * (z - z_[i]) / dz;
}

double PiecewiseLinearCdf::inverse_sup(double t) const {
    const double mass = f_.back();
    if (t < -1e-12 || t > mass + 1e-12)
        throw std::out_of_range("inverse_sup: t outside [0, total mass]");
    t = std::clamp(t, 0.0, mass);
    // Rightmost index with f <= t.
    std::size_t i = static_cast<std::size_t>(
        std::upper_bound(f_.begin(), f_.end(), t) - f_.begin());
    if (i == 0) i = 1;
    if (i >= f_.size()) return z_.back();
    // f_[i-1] <= t < f_[i]; interpolate, landing on the right plateau edge
    // automatically because upper_bound skipped all equal values.
    double df = f_[i] - f_[i - 1];
    if (t == f_[i - 1] || df == 0.0) return z_[i - 1];
    return z_[i - 1] + (t - f_[i - 1]) * (z_[i] - z_[i - 1]) / df;
}

DensityCdf::DensityCdf(std::function<double(double)> density, double tol)
    : density_(std::move(density)), tol_(tol) {}

double DensityCdf::value(double z) const {
    z = std::clamp(z, 0.0, 1.0);
    if (z == 0.0) return 0.0;
    // fixed panels before the adaptive pass so that narrow features cannot
    // hide inside an early-terminating interval
    const int panels = 8;
    CompensatedSum acc;
    for (int p = 0; p < panels; ++p) {
        double a = z * p / panels, b = z * (p + 1) / panels;
        acc.add(integrate_adaptive(density_, a, b, tol_ / panels));
    }
    return acc.value();
}

double ScaledCdf::inverse_sup(double t) const {
    if (scale_ == 0.0) return 1.0;  // zero measure: degenerate split
    return base_->inverse_sup(t / scale_);
}

// ---------------------------------------------------------------------------
// CubeMeasure
// ---------------------------------------------------------------------------

CubeMeasure CubeMeasure::uniform(int dim) {
    if (dim < 1) throw std::invalid_argument("CubeMeasure: dim >= 1");
    CubeMeasure m;
    m.dim_ = dim;
    m.kind_ = Kind::Uniform;
    m.description_ = "uniform";
    return m;
}

CubeMeasure CubeMeasure::product(std::vector<std::shared_ptr<const Cdf1d>> axes) {
    if (axes.empty()) throw std::invalid_argument("CubeMeasure: empty axis list");
    CubeMeasure m;
    m.dim_ = static_cast<int>(axes.size());
    m.kind_ = Kind::Product;
    for (const auto& a : axes)
        if (std::abs(a->total() - 1.0) > 1e-9)
            throw std::invalid_argument("CubeMeasure: per-axis mass must be 1");
    m.axes_ = std::move(axes);
    m.description_ = "product";
    return m;
}

CubeMeasure CubeMeasure::general(int dim, std::function<double(std::span<const double>)> density,
                                 std::string description) {
    if (dim < 1 || dim > 3) throw std::invalid_argument("CubeMeasure: general densities need dim in 1..3");
    CubeMeasure m;
    m.dim_ = dim;
    m.kind_ = Kind::General;
    m.density_ = std::move(density);
    m.description_ = std::move(description);
    // Coarse scan for a rejection bound.
    double bound = 0.0;
    int grid = dim == 1 ? 1024 : (dim == 2 ? 64 : 24);
    std::vector<double> z(dim);
    std::vector<int> idx(dim, 0);
    for (;;) {
        for (int a = 0; a < dim; ++a) z[a] = (idx[a] + 0.5) / grid;
        bound = std::max(bound, m.density_(z));
        int a = 0;
        while (a < dim && ++idx[a] == grid) idx[a++] = 0;
        if (a == dim) break;
    }
    m.density_bound_ = bound * 1.5 + 1e-9;
    return m;
}

CubeMeasure CubeMeasure::named(const std::string& name, int dim) {
    if (name.empty() || name == "uniform") return uniform(dim);
    if (name == "product-zsq" || name == "product-4z1z2") {
        std::vector<std::shared_ptr<const Cdf1d>> axes;
        for (int a = 0; a < dim; ++a) axes.push_back(std::make_shared<PowerCdf>(2.0));
        return product(std::move(axes));
    }
    if (name == "halfstep") {
        std::vector<std::shared_ptr<const Cdf1d>> axes;
        axes.push_back(std::make_shared<PowerCdf>(1.0));
        for (int a = 1; a < dim; ++a)
            axes.push_back(std::make_shared<PiecewiseLinearCdf>(
                std::vector<double>{0.0, 0.5, 1.0}, std::vector<double>{0.0, 0.0, 1.0}));
        CubeMeasure m = product(std::move(axes));
        m.description_ = "halfstep";
        return m;
    }
    throw ConfigError("unknown cube measure: " + name);
}

double CubeMeasure::box_mass(std::span<const double> lo, std::span<const double> hi) const {
    if (static_cast<int>(lo.size()) != dim_ || static_cast<int>(hi.size()) != dim_)
        throw std::invalid_argument("box_mass: dimension mismatch");
    switch (kind_) {
        case Kind::Uniform: {
            double v = 1.0;
            for (int a = 0; a < dim_; ++a) v *= std::max(0.0, hi[a] - lo[a]);
            return v;
        }
        case Kind::Product: {
            double v = 1.0;
            for (int a = 0; a < dim_; ++a)
                v *= std::max(0.0, axes_[a]->value(hi[a]) - axes_[a]->value(lo[a]));
            return v;
        }
        case Kind::General: {
            // Nested adaptive quadrature over the box.
            std::vector<double> z(dim_);
            std::function<double(int)> layer = [&](int axis) -> double {
                if (axis == dim_) return density_(z);
                return integrate_adaptive(
                    [&](double t) {
                        z[axis] = t;
                        return layer(axis + 1);
                    },
                    lo[axis], hi[axis], 1e-10 / dim_);
            };
            return layer(0);
        }
    }
    return 0.0;
}

std::shared_ptr<const Cdf1d> CubeMeasure::conditional_cdf(std::span<const double> lo,
                                                          std::span<const double> hi,
                                                          int axis) const {
    if (axis < 0 || axis >= dim_) throw std::invalid_argument("conditional_cdf: bad axis");
    double prefix = 1.0;
    switch (kind_) {
        case Kind::Uniform:
            for (int a = 0; a < axis; ++a) prefix *= std::max(0.0, hi[a] - lo[a]);
            return std::make_shared<PowerCdf>(1.0, prefix);
        case Kind::Product:
            for (int a = 0; a < axis; ++a)
                prefix *= std::max(0.0, axes_[a]->value(hi[a]) - axes_[a]->value(lo[a]));
            return std::make_shared<ScaledCdf>(axes_[axis], prefix);
        case Kind::General: {
            std::vector<double> boxLo(lo.begin(), lo.begin() + axis);
            std::vector<double> boxHi(hi.begin(), hi.begin() + axis);
            auto self = *this;  // cheap copy: shared function objects
            auto density1d = [self, boxLo, boxHi, axis](double z) -> double {
                std::vector<double> point(self.dim_);
                std::function<double(int)> layer = [&](int a) -> double {
                    if (a == axis) {
                        point[a] = z;
                        return layer(a + 1);
                    }
                    if (a == self.dim_) return self.density_(point);
                    if (a < axis)
                        return integrate_adaptive(
                            [&](double t) {
                                point[a] = t;
                                return layer(a + 1);
                            },
                            boxLo[a], boxHi[a], 1e-10 / self.dim_);
                    // axes beyond `axis` integrate over the full [0,1]
                    return integrate_adaptive(
                        [&](double t) {
                            point[a] = t;
                            return layer(a + 1);
                        },
                        0.0, 1.0, 1e-10 / self.dim_);
                };
                return layer(0);
            };
            return std::make_shared<DensityCdf>(density1d);
        }
    }
    return nullptr;
}

std::vector<double> CubeMeasure::sample_in_box(std::span<const double> lo,
                                               std::span<const double> hi,
                                               RngStream& rng) const {
    std::vector<double> z(dim_);
    switch (kind_) {
        case Kind::Uniform:
            for (int a = 0; a < dim_; ++a) z[a] = rng.uniform(lo[a], hi[a]);
            return z;
        case Kind::Product:
            for (int a = 0; a < dim_; ++a) {
                double fa = axes_[a]->value(lo[a]);
                double fb = axes_[a]->value(hi[a]);
                if (fb <= fa) {
                    z[a] = lo[a];  // zero-mass interval: degenerate cell
                } else {
                    z[a] = axes_[a]->inverse_sup(rng.uniform(fa, fb));
                }
            }
            return z;
        case Kind::General: {
            // Rejection within the box against the global density bound; a
            // run of this many misses puts the acceptance below 1e-3 with
            // overwhelming probability.
            const long max_tries = 10000;
            for (long tries = 1; tries <= max_tries; ++tries) {
                for (int a = 0; a < dim_; ++a) z[a] = rng.uniform(lo[a], hi[a]);
                if (rng.uniform() * density_bound_ <= density_(z)) return z;
                if (tries == max_tries)
                    throw PreconditionError("sample_in_box: rejection acceptance below 1e-3");
            }
        }
    }
    return z;
}

std::vector<double> CubeMeasure::sample(RngStream& rng) const {
    std::vector<double> lo(dim_, 0.0), hi(dim_, 1.0);
    return sample_in_box(lo, hi, rng);
}

double CubeMeasure::density_at(std::span<const double> z) const {
    switch (kind_) {
        case Kind::Uniform:
            return 1.0;
        case Kind::Product: {
            // Numeric derivative only needed for generic axes; the named
            // measures all have simple densities, so use a central difference.
            double v = 1.0;
            for (int a = 0; a < dim_; ++a) {
                double h = 1e-6;
                double za = std::clamp(z[a], h, 1.0 - h);
                v *= (axes_[a]->value(za + h) - axes_[a]->value(za - h)) / (2.0 * h);
            }
            return v;
        }
        case Kind::General:
            return density_(z);
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// RadialMeasure
// ---------------------------------------------------------------------------

RadialMeasure RadialMeasure::lebesgue(double lo, double hi) {
    if (!(hi >= lo) || lo < 0.0)
        throw std::invalid_argument("RadialMeasure: need 0 <= lo <= hi");
    RadialMeasure xi;
    xi.kind_ = Kind::Lebesgue;
    xi.lo_ = lo;
    xi.hi_ = hi;
    return xi;
}

RadialMeasure RadialMeasure::atomic(std::vector<double> radii, std::vector<double> weights) {
    if (radii.size() != weights.size() || radii.empty())
        throw std::invalid_argument("RadialMeasure: atoms and weights must match");
    std::vector<std::size_t> order(radii.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return radii[a] < radii[b]; });
    RadialMeasure xi;
    xi.kind_ = Kind::Atomic;
    for (auto i : order) {
        if (weights[i] < 0.0) throw std::invalid_argument("RadialMeasure: negative weight");
        xi.radii_.push_back(radii[i]);
        xi.weights_.push_back(weights[i]);
    }
    return xi;
}

RadialMeasure RadialMeasure::uniform_atomic(std::vector<double> radii) {
    std::vector<double> w(radii.size(), 1.0 / static_cast<double>(radii.size()));
    return atomic(std::move(radii), std::move(w));
}

double RadialMeasure::total_mass() const {
    if (kind_ == Kind::Lebesgue) return hi_ - lo_;
    double s = 0.0;
    for (double w : weights_) s += w;
    return s;
}

double RadialMeasure::support_max() const {
    if (kind_ == Kind::Lebesgue) return hi_;
    return radii_.empty() ? 0.0 : radii_.back();
}

double RadialMeasure::sigma(double r) const {
    if (kind_ == Kind::Lebesgue) return std::max(0.0, hi_ - std::max(r, lo_));
    double s = 0.0;
    for (std::size_t i = 0; i < radii_.size(); ++i)
        if (radii_[i] >= r) s += weights_[i];
    return s;
}

double RadialMeasure::interval_mass(double a, double b) const {
    if (b <= a) return 0.0;
    if (kind_ == Kind::Lebesgue) {
        double lo = std::max(a, lo_), hi = std::min(b, hi_);
        return std::max(0.0, hi - lo);
    }
    double s = 0.0;
    for (std::size_t i = 0; i < radii_.size(); ++i)
        if (radii_[i] >= a && radii_[i] < b) s += weights_[i];
    return s;
}

std::optional<double> RadialMeasure::c0(const std::vector<double>& finite_radii) const {
    if (kind_ == Kind::Lebesgue) return 1.0;
    if (finite_radii.empty()) return std::nullopt;  // atoms on a continuum: no Lipschitz bound
    double best = 0.0;
    for (std::size_t i = 0; i < finite_radii.size(); ++i)
        for (std::size_t j = i + 1; j < finite_radii.size(); ++j) {
            double a = finite_radii[i], b = finite_radii[j];
            if (b <= a) continue;
            best = std::max(best, interval_mass(a, b) / (b - a));
        }
    return best > 0.0 ? std::optional<double>(best) : std::nullopt;
}

double RadialMeasure::integrate(const std::function<double(double)>& f,
                                std::vector<double> hints, int gauss_order) const {
    if (kind_ == Kind::Atomic) {
        CompensatedSum acc;
        for (std::size_t i = 0; i < radii_.size(); ++i)
            if (weights_[i] > 0.0) acc.add(weights_[i] * f(radii_[i]));
        return acc.value();
    }
    return integrate_segments(f, lo_, hi_, std::move(hints), gauss_order);
}

std::string RadialMeasure::description() const {
    if (kind_ == Kind::Lebesgue)
        return "lebesgue[" + std::to_string(lo_) + "," + std::to_string(hi_) + "]";
    return "atomic(" + std::to_string(radii_.size()) + " atoms)";
}

double sigma_eval(const RadialMeasure& xi, double r, double diameter) {
    if (r < 0.0 || r > diameter + 1e-12)
        throw std::out_of_range("sigma_eval: r outside [0, diameter]");
    return xi.sigma(r);
}

// ---------------------------------------------------------------------------
// RationalRadialMeasure
// ---------------------------------------------------------------------------

RationalRadialMeasure RationalRadialMeasure::uniform_atomic(std::vector<Rat> radii) {
    RationalRadialMeasure xi;
    Rat w = Rat(1) / Rat(static_cast<long>(radii.size()));
    xi.radii = std::move(radii);
    xi.weights.assign(xi.radii.size(), w);
    return xi;
}

Rat RationalRadialMeasure::total_mass() const {
    Rat s = 0;
    for (const Rat& w : weights) s += w;
    return s;
}

Rat RationalRadialMeasure::sigma(const Rat& r) const {
    Rat s = 0;
    for (std::size_t i = 0; i < radii.size(); ++i)
        if (radii[i] >= r) s += weights[i];
    return s;
}

Rat RationalRadialMeasure::c0() const {
    Rat best = 0;
    for (std::size_t i = 0; i < radii.size(); ++i)
        for (std::size_t j = 0; j < radii.size(); ++j) {
            if (!(radii[i] < radii[j])) continue;
            Rat mass = 0;
            for (std::size_t k = 0; k < radii.size(); ++k)
                if (radii[k] >= radii[i] && radii[k] < radii[j]) mass += weights[k];
            Rat ratio = mass / (radii[j] - radii[i]);
            if (ratio > best) best = ratio;
        }
    return best;
}

}  // namespace mps

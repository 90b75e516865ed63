#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

/// Shared numeric utilities: seeded RNG streams, compensated summation,
/// running statistics, Gauss-Legendre quadrature and small helpers used
/// across the library.
namespace mps {

inline const char* version() {
#ifdef METRICPOINTS_VERSION
    return METRICPOINTS_VERSION;
#else
    return "dev";
#endif
}

/// Invalid user-supplied configuration (bad flag combinations, malformed
/// specs).  The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// An operation was invoked on inputs that violate its preconditions
/// (e.g. exact mode on a space without constant ball volumes).  The CLI
/// maps this to exit code 3.
struct PreconditionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Requested computation is not available for the given inputs.
struct UnsupportedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Random number streams
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// xoshiro256++ generator wrapped with explicit seeding; all sampling in
/// the library draws from an explicitly seeded stream, there is no global
/// RNG state.  Substreams derived from a root seed are independent enough
/// for parallel Monte Carlo trials and are deterministic across platforms.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
    }

    /// Deterministic child stream for trial/shard `id` of a root seed.
    static RngStream substream(std::uint64_t root, std::uint64_t id) {
        std::uint64_t sm = root ^ (0x9E3779B97F4A7C15ull * (id + 1));
        return RngStream(splitmix64(sm));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0,1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n) {
        // mod bias is negligible for n << 2^64 but avoid it anyway
        std::uint64_t limit = ~std::uint64_t(0) - (~std::uint64_t(0) % n);
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % n;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t state_[4];
};

// ---------------------------------------------------------------------------
// Summation and running statistics
// ---------------------------------------------------------------------------

/// Neumaier compensated accumulator; pairwise-equivalent accuracy for the
/// long pair sums without requiring power-of-two lengths.
class CompensatedSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Welford running mean/variance; `stderr_of_mean` is the usual
/// sqrt(s^2 / n) sample standard error.
class RunningStats {
public:
    void add(double x) {
        ++n_;
        double d = x - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_ += d * (x - mean_);
    }
    std::size_t count() const { return n_; }
    double mean() const { return mean_; }
    double sample_variance() const {
        return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
    }
    double stderr_of_mean() const {
        return n_ > 1 ? std::sqrt(sample_variance() / static_cast<double>(n_)) : 0.0;
    }

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

/// Value with a (possibly zero) standard error and a tag describing how it
/// was obtained ("exact", "closed-form", "quadrature", "mc").
struct Estimate {
    double value = 0.0;
    double stderr_ = 0.0;
    std::string method = "exact";
};

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

struct GaussRule {
    std::vector<double> nodes;    // on (-1, 1)
    std::vector<double> weights;
};

/// Gauss-Legendre rule of order n (cached).
const GaussRule& gauss_rule(int n);

/// Integrate f over [a, b] with an n-point Gauss rule.
double integrate_gauss(const std::function<double(double)>& f, double a, double b, int n);

/// Integrate f over [a, b] splitting at the supplied interior breakpoints;
/// each smooth piece gets an n-point Gauss rule.  Breakpoints outside
/// (a, b) are ignored, duplicates are collapsed.
double integrate_segments(const std::function<double(double)>& f, double a, double b,
                          std::vector<double> breakpoints, int n);

/// Adaptive Simpson to absolute tolerance `tol`.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double tol, int max_depth = 48);

// ---------------------------------------------------------------------------
// Misc
// ---------------------------------------------------------------------------

/// Least-squares slope of y against x.
double regression_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Run fn(i) for i in [0, n) on up to `threads` workers.  The caller makes
/// the work deterministic by keying any randomness on i, so the schedule
/// does not affect results.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace mps

#include "sqz/homodyne.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace sqz {

const char* const kRngAlgorithm = "mt19937_64+box-muller";

namespace {

std::uint64_t splitmix64_next(std::uint64_t& s) {
    s += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Independent sub-seed per (stream, index): segment data never depends on the
// rest of the schedule or on generation order.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    std::uint64_t s = seed;
    splitmix64_next(s);
    s ^= 0xD1B54A32D192ED03ULL * (stream + 1);
    splitmix64_next(s);
    s ^= 0x8CB92BA72F3D8DD7ULL * (index + 1);
    return splitmix64_next(s);
}

constexpr std::uint64_t kStreamSegment = 0;
constexpr std::uint64_t kStreamVacuum = 1;
constexpr std::uint64_t kStreamSweep = 2;

// Explicit Box-Muller on top of mt19937_64. Unlike std::normal_distribution,
// every step is pinned down, so traces are reproducible across standard
// libraries.
class GaussianSampler {
public:
    explicit GaussianSampler(std::uint64_t seed) : eng_(seed) {}

    double operator()() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53; // (0, 1]
        const double u2 = static_cast<double>(eng_() >> 11) * 0x1.0p-53;         // [0, 1)
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

double dark_variance(const std::optional<double>& dark_db) {
    if (!dark_db) return 0.0;
    if (!std::isfinite(*dark_db))
        throw validation_error("dark_noise_db must be finite when given");
    return db_to_linear(*dark_db);
}

double unbiased_variance(const std::vector<double>& xs) {
    const auto n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return ss / (n - 1.0);
}

} // namespace

HomodyneTrace simulate(const HomodyneConfig& config) {
    if (config.phase_schedule.empty())
        throw validation_error("simulate: phase_schedule must contain at least one segment");
    std::size_t longest = 0;
    for (std::size_t i = 0; i < config.phase_schedule.size(); ++i) {
        const auto& seg = config.phase_schedule[i];
        if (!std::isfinite(seg.theta)) {
            std::ostringstream os;
            os << "simulate: segment " << i << " has non-finite theta";
            throw validation_error(os.str());
        }
        if (seg.count < 2) {
            std::ostringstream os;
            os << "simulate: segment " << i << " needs at least 2 samples, got " << seg.count;
            throw validation_error(os.str());
        }
        longest = std::max(longest, seg.count);
    }
    const double dark = dark_variance(config.dark_noise_db);
    const GaussianState u = config.state.to(Convention::Unity);

    HomodyneTrace trace;
    trace.schedule = config.phase_schedule;
    trace.seed_used = config.seed;
    trace.rng_algorithm = kRngAlgorithm;
    trace.segments.reserve(config.phase_schedule.size());
    for (std::size_t i = 0; i < config.phase_schedule.size(); ++i) {
        const auto& seg = config.phase_schedule[i];
        const double c = std::cos(seg.theta);
        const double s = std::sin(seg.theta);
        const double sigma = std::sqrt(c * c * u.v1() + s * s * u.v2() + dark);
        GaussianSampler draw(derive_seed(config.seed, kStreamSegment, i));
        std::vector<double> samples(seg.count);
        for (double& x : samples) x = sigma * draw();
        trace.segments.push_back(std::move(samples));
    }
    GaussianSampler draw(derive_seed(config.seed, kStreamVacuum, 0));
    const double sigma_vac = std::sqrt(1.0 + dark);
    trace.vacuum_reference.resize(longest);
    for (double& x : trace.vacuum_reference) x = sigma_vac * draw();
    return trace;
}

VarianceEstimate estimate_variance(const std::vector<double>& samples,
                                   const std::vector<double>& vacuum_reference,
                                   std::optional<double> dark_noise_db) {
    if (samples.size() < 2 || vacuum_reference.size() < 2)
        throw validation_error("estimate_variance: both series need at least 2 samples");
    const double dark = dark_variance(dark_noise_db);
    const double s2_sig = unbiased_variance(samples);
    const double s2_vac = unbiased_variance(vacuum_reference);
    const double denom = s2_vac - dark;
    if (denom <= 0.0) {
        std::ostringstream os;
        os << "estimate_variance: vacuum reference variance " << s2_vac
           << " does not exceed the dark variance " << dark << " (unphysical calibration)";
        throw validation_error(os.str());
    }
    const double v = (s2_sig - dark) / denom;
    // Gaussian variance-of-variance 2 sigma^4/(n-1) for each series, first order.
    const double var_sig = 2.0 * s2_sig * s2_sig / (static_cast<double>(samples.size()) - 1.0);
    const double var_vac
        = 2.0 * s2_vac * s2_vac / (static_cast<double>(vacuum_reference.size()) - 1.0);
    const double se = std::sqrt(var_sig + v * v * var_vac) / denom;
    return VarianceEstimate{v, se};
}

std::vector<SweepPoint> sweep_trace(const GaussianState& state, double rotation_rate,
                                    std::size_t total_samples, std::size_t window,
                                    std::uint64_t seed) {
    if (window < 16) {
        std::ostringstream os;
        os << "sweep_trace: window " << window << " below the minimum of 16 samples";
        throw validation_error(os.str());
    }
    if (!std::isfinite(rotation_rate) || rotation_rate < 0.0)
        throw validation_error("sweep_trace: rotation_rate must be non-negative and finite");
    if (rotation_rate * static_cast<double>(window) >= 0.05) {
        std::ostringstream os;
        os << "sweep_trace: phase advances " << rotation_rate * static_cast<double>(window)
           << " rad within one window (limit 0.05); enlarge the window or slow the ramp";
        throw validation_error(os.str());
    }
    if (total_samples < window)
        throw validation_error("sweep_trace: total_samples smaller than one window");

    const GaussianState u = state.to(Convention::Unity);
    GaussianSampler draw(derive_seed(seed, kStreamSweep, 0));
    std::vector<SweepPoint> out;
    std::vector<double> buf(window);
    for (std::size_t start = 0; start + window <= total_samples; start += window) {
        for (std::size_t j = 0; j < window; ++j) {
            const double theta = rotation_rate * static_cast<double>(start + j);
            const double c = std::cos(theta);
            const double s = std::sin(theta);
            buf[j] = std::sqrt(c * c * u.v1() + s * s * u.v2()) * draw();
        }
        const double theta_center
            = rotation_rate * (static_cast<double>(start) + (static_cast<double>(window) - 1.0) / 2.0);
        out.push_back(SweepPoint{theta_center, unbiased_variance(buf)});
    }
    return out;
}

} // namespace sqz

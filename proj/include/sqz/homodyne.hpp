#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sqz/gaussian.hpp"

namespace sqz {

// Name of the (fixed, platform-stable) pseudo-random scheme recorded in every
// trace: mt19937_64 driving an explicit Box-Muller transform. std::normal_
// distribution is implementation-defined and would break cross-platform
// reproducibility.
extern const char* const kRngAlgorithm;

struct PhaseSegment {
    double theta;       // local-oscillator phase, radians
    std::size_t count;  // samples in this segment, >= 2
};

struct HomodyneConfig {
    GaussianState state;
    std::vector<PhaseSegment> phase_schedule;
    // Detector dark-noise variance relative to vacuum, in dB (typically
    // negative, e.g. -20 means 1% of vacuum noise). Absent = no dark noise.
    std::optional<double> dark_noise_db;
    std::uint64_t seed = 0;
};

struct HomodyneTrace {
    std::vector<PhaseSegment> schedule;
    std::vector<std::vector<double>> segments; // one sample series per schedule entry
    std::vector<double> vacuum_reference;      // blocked-signal calibration series
    std::uint64_t seed_used = 0;
    std::string rng_algorithm;
};

// Each segment is drawn i.i.d. from N(0, cos^2(theta) v1 + sin^2(theta) v2 + dark)
// in Unity convention; the vacuum reference from N(0, 1 + dark) with the same
// number of samples as the largest segment. Every segment (and the reference)
// derives an independent sub-seed from (seed, index), so its samples do not
// depend on the rest of the schedule.
HomodyneTrace simulate(const HomodyneConfig& config);

struct VarianceEstimate {
    double v_normalized;   // signal variance in vacuum units
    double standard_error;
};

// Ratio of unbiased sample variances, signal over vacuum reference. If
// dark_noise_db is given, the dark variance is subtracted from both before
// the ratio; a vacuum-reference variance at or below the dark level is
// rejected as an unphysical calibration. The standard error propagates the
// Gaussian variance-of-variance of both series.
VarianceEstimate estimate_variance(const std::vector<double>& samples,
                                   const std::vector<double>& vacuum_reference,
                                   std::optional<double> dark_noise_db = std::nullopt);

struct SweepPoint {
    double theta_center;
    double v_estimate;  // raw windowed variance, Unity convention
};

// Continuous phase ramp theta_j = rotation_rate * j chopped into windows of
// `window` samples, each reduced to (center phase, sample variance). The ramp
// must be slow enough that theta varies by < 0.05 rad within one window.
std::vector<SweepPoint> sweep_trace(const GaussianState& state, double rotation_rate,
                                    std::size_t total_samples, std::size_t window,
                                    std::uint64_t seed = 0);

} // namespace sqz

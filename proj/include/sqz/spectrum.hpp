#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "sqz/fock.hpp"
#include "sqz/gaussian.hpp"

namespace sqz {

inline constexpr double speed_of_light = 299792458.0;          // m/s
inline constexpr double planck_constant = 6.62607015e-34;      // J s
inline constexpr double carrier_frequency_1064nm = 281.76e12;  // Hz
inline constexpr double photon_energy_1064nm = planck_constant * carrier_frequency_1064nm;

// Optional cavity geometry backing the decay rate: kappa = (T + L) * c / l.
struct CavityGeometry {
    double transmittance;    // output coupler power transmittance T
    double round_trip_loss;  // round-trip loss L
    double length_m;         // round-trip optical path length l
};

// Below-threshold OPO noise-spectrum parameters.
class SpectrumModel {
public:
    SpectrumModel(double pump_ratio, double eta_gamma, double kappa,
                  std::optional<CavityGeometry> geometry = std::nullopt);

    double pump_ratio() const { return pump_ratio_; }  // P_pump / P_threshold in [0, 1)
    double eta_gamma() const { return eta_gamma_; }    // in (0, 1]
    double kappa() const { return kappa_; }            // cavity decay rate, rad/s
    const std::optional<CavityGeometry>& geometry() const { return geometry_; }

private:
    double pump_ratio_;
    double eta_gamma_;
    double kappa_;
    std::optional<CavityGeometry> geometry_;
};

// Quadrature variances at Fourier frequency f (Hz), Unity convention:
//   v_{1,2}(f) = 1 -/+ eta_gamma * 4x / ((1 +/- x)^2 + 4K^2),
//   x = sqrt(pump_ratio), K = 2*pi*f / kappa.
std::pair<double, double> model_variances(const SpectrumModel& model, double f_hz);

// Frequency at which v1 rises halfway from v1(0) to the vacuum level. Closed
// form: K^2 = (1+x)^2/4, i.e. f = kappa*(1+x)/(4*pi).
double squeezing_bandwidth(const SpectrumModel& model);

// As above but solved by bisection on v1(f); cross-check for the closed form.
double squeezing_bandwidth_bisect(const SpectrumModel& model);

struct SpectrumData {
    std::vector<double> frequencies;  // Hz, strictly increasing, positive
    std::vector<double> v1_obs;       // Unity convention; empty if not measured
    std::vector<double> v2_obs;
    double resolution_bandwidth = 0.0;

    void validate() const;            // throws validation_error
};

enum class FitTarget { V1Only, V2Only, Joint };

struct FitResult {
    SpectrumModel model;
    double residual;          // sum of squared dB residuals
    bool improved;            // false: optimizer could not improve on init
    bool degenerate_warning;  // flat residual surface at the optimum
    std::size_t iterations;
};

// Least-squares fit of (pump_ratio, eta_gamma, kappa) to measured spectra,
// minimizing sum over points of [10*log10(model/observed)]^2 for the selected
// traces. Levenberg-Marquardt on transformed coordinates (logit for the two
// ratios, log for kappa) keeps every iterate inside the bounds
// pump_ratio in [0, 0.999], eta_gamma in (0, 1], kappa > 0.
FitResult fit_spectrum(const SpectrumData& data, const SpectrumModel& init, FitTarget which);

struct RateResult {
    double rate;                              // photons / second
    double power;                             // watts; rate * photon_energy_1064nm
    PhotonDistribution weighted_distribution; // bin-averaged P(n)
    double conditional_mean;                  // mean photon number given n >= 1
    double max_bin_trace_deficit;
    std::size_t bins;
};

// Integrate the down-converted photon flux over half a free spectral range:
// split [0, half_fsr] into bins of bin_width centered at (i+1/2)*bin_width,
// evaluate the model variances per bin, form each bin's photon-number
// distribution, and sum mean photon numbers times bin_width (fixed-order
// pairwise tree, so the result does not depend on evaluation order).
// fock_truncation caps the per-bin truncation; quiet far-from-carrier bins
// (mean photon < 5) use the cheaper N = 50. A bin whose distribution leaves
// more than 1% of its trace above the cap raises convergence_error.
RateResult spectral_photon_rate(const SpectrumModel& model, double half_fsr_hz,
                                double bin_width_hz, std::size_t fock_truncation);

} // namespace sqz

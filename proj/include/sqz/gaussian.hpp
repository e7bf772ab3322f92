#pragma once

#include <utility>
#include <vector>

#include "sqz/errors.hpp"

namespace sqz {

// Variance normalization conventions in common use for quadrature operators.
// The enumerator value is the variance of the vacuum state.
enum class Convention { Quarter, Half, Unity };

double vacuum_variance(Convention c);
const char* convention_name(Convention c);

// dB relative to vacuum noise: v_linear = vacuum * 10^(dB/10).
double db_to_linear(double v_db);
double linear_to_db(double ratio);

// Zero-mean single-mode Gaussian state described by the variances of its
// squeezed (v1) and anti-squeezed (v2) quadratures. Construction validates
// positivity and the Heisenberg bound v1*v2 >= vacuum^2; violations within
// a 1e-12 relative tolerance (dB-table rounding) are clamped onto the bound,
// anything larger is rejected.
class GaussianState {
public:
    GaussianState(double v1, double v2, Convention conv);

    // v1_db / v2_db are decibels relative to vacuum noise.
    static GaussianState from_db(double v1_db, double v2_db, Convention conv);

    double v1() const { return v1_; }
    double v2() const { return v2_; }
    Convention convention() const { return conv_; }

    // Convert to another normalization convention. The vacuum variances are
    // powers of two, so round trips are exact.
    GaussianState to(Convention target) const;

    double v1_db() const;
    double v2_db() const;
    bool is_vacuum() const;

private:
    double v1_;
    double v2_;
    Convention conv_;
};

// Combined detection-and-escape efficiency; (1 - eta_gamma) is the vacuum
// admixture of the loss channel.
struct LossChannel {
    double eta_gamma;
    explicit LossChannel(double eta_gamma_);
};

// V_i = eta_gamma * V'_i + (1 - eta_gamma) * vacuum. Accepts any convention
// (the map is convention-covariant); the result is returned in Unity
// convention as that is the library's canonical internal normalization.
GaussianState apply_loss(const GaussianState& pure, const LossChannel& loss);

struct LossInference {
    LossChannel loss;
    // Inferred pure-state variance pairs (Unity convention), one per input
    // pair. Reported raw rather than as GaussianState: when several measured
    // pairs are reconciled by a single eta_gamma, an individual inverted pair
    // can land marginally below the Heisenberg bound.
    std::vector<std::pair<double, double>> pure_pairs;
    double residual; // value of the least-squares objective at the optimum
};

// Find the single eta_gamma that minimizes sum over pairs of
// (ln V1' + ln V2')^2 where V'_i = (V_i - (1-eta))/eta, i.e. makes the
// de-lossed pairs as close to minimum-uncertainty as possible. Inputs must
// be Unity-convention states with v1 < 1 < v2 (squeezing present).
LossInference infer_loss(const std::vector<GaussianState>& measured_pairs);

// mu = vacuum / sqrt(v1*v2); 1 exactly at the Heisenberg bound.
double purity(const GaussianState& s);

// <n> = (v1 + v2)/4 - 1/2 in Unity convention; 0 for vacuum.
double mean_photon_number(const GaussianState& s);

} // namespace sqz

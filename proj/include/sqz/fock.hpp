#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "sqz/gaussian.hpp"

namespace sqz {

// Real symmetric Fock-basis density matrix truncated to photon numbers
// 0..dim-1, with truncation bookkeeping.
struct DensityMatrix {
    GaussianState source_state;
    std::size_t dim = 0;               // N + 1
    std::vector<double> entries;       // row-major dim x dim
    double trace_deficit = 0.0;        // 1 - trace of the truncated matrix
    bool truncation_warning = false;   // trace_deficit > 0.01
    std::size_t oracle_workspace = 0;  // nonzero when built by the oracle

    DensityMatrix(const GaussianState& s, std::size_t dim_)
        : source_state(s), dim(dim_), entries(dim_ * dim_, 0.0) {}

    double at(std::size_t m, std::size_t n) const { return entries[m * dim + n]; }
    double& at(std::size_t m, std::size_t n) { return entries[m * dim + n]; }
    double trace() const;
    double trace_of_square() const;    // sum of squared entries (real symmetric)
    std::vector<double> diagonal() const;
};

struct PhotonDistribution {
    GaussianState source_state;
    std::vector<double> probabilities; // P(0..N)

    PhotonDistribution(const GaussianState& s, std::vector<double> p)
        : source_state(s), probabilities(std::move(p)) {}

    double mean() const;               // sum n * P(n)
    double total() const;              // sum P(n), <= 1 up to truncation
};

namespace detail {
// Single matrix entry rho_{m,n} for Unity-convention variances. Pure function
// of (v1, v2, m, n): entries do not depend on the truncation, so truncating a
// large matrix equals computing a small one. Evaluated via log-gamma
// magnitudes with separately tracked signs (factorials up to 170! overflow
// any naive scheme), combined by a max-exponent exponential sum.
double fock_entry(double v1_unity, double v2_unity, std::size_t m, std::size_t n);
} // namespace detail

// Fock-basis density matrix of the (generally mixed) squeezed vacuum state.
// Entries with m+n odd are exactly zero and are skipped, not computed. A
// trace deficit above 0.01 sets truncation_warning rather than throwing.
DensityMatrix density_matrix(const GaussianState& state, std::size_t truncation);

// Divide by the truncated trace, the conventional final step when a state is
// reported at a finite photon-number cutoff.
DensityMatrix normalized(const DensityMatrix& dm);

// Top-left block of an existing matrix; bit-identical to computing directly
// at the smaller truncation.
DensityMatrix truncate(const DensityMatrix& dm, std::size_t truncation);

// Independent brute-force construction used to verify density_matrix:
// decompose the state as a squeezed thermal state (e^{2r} = sqrt(v2/v1),
// 2*nbar+1 = sqrt(v1*v2)), exponentiate the squeeze generator
// (r/2)(a^2 - a^dag^2) on a larger workspace, conjugate the thermal diagonal
// and truncate. workspace = 0 selects 8*(truncation+1); explicit values must
// be >= 4*(truncation+1). Throws convergence_error when the thermal tail
// beyond the workspace exceeds 1e-10.
DensityMatrix oracle_density_matrix(const GaussianState& state, std::size_t truncation,
                                    std::size_t workspace = 0);

// Diagonal of the density matrix.
PhotonDistribution photon_distribution(const DensityMatrix& dm);

// Same numbers computed without the off-diagonal entries (identical per-entry
// code path; used where only P(n) is needed, e.g. spectral integration).
PhotonDistribution photon_distribution(const GaussianState& state, std::size_t truncation);

struct ContrastPoint {
    std::size_t n;                     // even photon number >= 2
    std::optional<double> contrast;    // absent when P(n-1)=P(n)=P(n+1)=0
};

// Odd/even oscillation metric
//   contrast(n) = [P(n) - (P(n-1)+P(n+1))/2] / [P(n) + (P(n-1)+P(n+1))/2]
// for even n in [2, max_n]; +1 when the neighboring odd probabilities vanish.
std::vector<ContrastPoint> oscillation_contrast(const PhotonDistribution& pd, std::size_t max_n);

// Mean photon number of the distribution renormalized to n >= 1, i.e. the
// expected photon number given that at least one photon is present.
double conditional_mean_given_click(const PhotonDistribution& pd);

} // namespace sqz

#pragma once

#include <cstddef>
#include <vector>

#include "sqz/gaussian.hpp"

namespace sqz {

// Cell-centered evaluation grid. Each axis spans [-extent_sigmas*sigma,
// +extent_sigmas*sigma] in that axis' own standard deviation, split into
// points_per_axis equal cells sampled at their midpoints (so the Riemann sum
// of the density converges cleanly to the integral).
struct GridSpec {
    double extent_sigmas = 6.0;
    std::size_t points_per_axis = 512;
};

struct WignerGrid {
    std::vector<double> x1_axis;
    std::vector<double> x2_axis;
    // Row-major: values[i * x2_axis.size() + j] = W(x1_axis[i], x2_axis[j]).
    std::vector<double> values;
    double dx1 = 0.0;
    double dx2 = 0.0;
    Convention convention = Convention::Unity;

    double at(std::size_t i, std::size_t j) const { return values[i * x2_axis.size() + j]; }
    // Midpoint-rule integral over the grid; 1 - O(1e-9) for a 6 sigma extent.
    double integral() const;
    // Marginal densities: integrate over the other axis.
    std::vector<double> marginal_x1() const;
    std::vector<double> marginal_x2() const;
};

// W(x1, x2) = exp(-x1^2/(2 v1) - x2^2/(2 v2)) / (2 pi sqrt(v1 v2)),
// the normalized Gaussian quasi-probability density of the state, in the
// state's own convention units.
double wigner_value(const GaussianState& state, double x1, double x2);

WignerGrid wigner_eval(const GaussianState& state, const GridSpec& spec);

// Variance of a sampled 1-d density via the midpoint rule (the density need
// not be pre-normalized; it is normalized by its own mass).
double density_variance(const std::vector<double>& axis, const std::vector<double>& density, double dx);

} // namespace sqz

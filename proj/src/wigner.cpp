#include "sqz/wigner.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace sqz {

double wigner_value(const GaussianState& state, double x1, double x2) {
    const double v1 = state.v1();
    const double v2 = state.v2();
    const double norm = 1.0 / (2.0 * std::numbers::pi * std::sqrt(v1 * v2));
    return norm * std::exp(-x1 * x1 / (2.0 * v1) - x2 * x2 / (2.0 * v2));
}

WignerGrid wigner_eval(const GaussianState& state, const GridSpec& spec) {
    if (!std::isfinite(spec.extent_sigmas) || spec.extent_sigmas <= 0.0) {
        std::ostringstream os;
        os << "wigner_eval: extent_sigmas = " << spec.extent_sigmas << " must be positive";
        throw validation_error(os.str());
    }
    if (spec.points_per_axis == 0)
        throw validation_error("wigner_eval: points_per_axis must be positive");

    const std::size_t n = spec.points_per_axis;
    const double s1 = std::sqrt(state.v1());
    const double s2 = std::sqrt(state.v2());
    const double h1 = spec.extent_sigmas * s1;
    const double h2 = spec.extent_sigmas * s2;

    WignerGrid grid;
    grid.convention = state.convention();
    grid.dx1 = 2.0 * h1 / static_cast<double>(n);
    grid.dx2 = 2.0 * h2 / static_cast<double>(n);
    grid.x1_axis.resize(n);
    grid.x2_axis.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        grid.x1_axis[i] = -h1 + (static_cast<double>(i) + 0.5) * grid.dx1;
        grid.x2_axis[i] = -h2 + (static_cast<double>(i) + 0.5) * grid.dx2;
    }
    grid.values.resize(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            grid.values[i * n + j] = wigner_value(state, grid.x1_axis[i], grid.x2_axis[j]);
    return grid;
}

double WignerGrid::integral() const {
    long double acc = 0.0L;
    for (double v : values) acc += v;
    return static_cast<double>(acc) * dx1 * dx2;
}

std::vector<double> WignerGrid::marginal_x1() const {
    const std::size_t n1 = x1_axis.size();
    const std::size_t n2 = x2_axis.size();
    std::vector<double> out(n1, 0.0);
    for (std::size_t i = 0; i < n1; ++i) {
        long double acc = 0.0L;
        for (std::size_t j = 0; j < n2; ++j) acc += values[i * n2 + j];
        out[i] = static_cast<double>(acc) * dx2;
    }
    return out;
}

std::vector<double> WignerGrid::marginal_x2() const {
    const std::size_t n1 = x1_axis.size();
    const std::size_t n2 = x2_axis.size();
    std::vector<double> out(n2, 0.0);
    for (std::size_t j = 0; j < n2; ++j) {
        long double acc = 0.0L;
        for (std::size_t i = 0; i < n1; ++i) acc += values[i * n2 + j];
        out[j] = static_cast<double>(acc) * dx1;
    }
    return out;
}

double density_variance(const std::vector<double>& axis, const std::vector<double>& density,
                        double dx) {
    if (axis.size() != density.size() || axis.empty())
        throw validation_error("density_variance: axis and density sizes must match and be non-empty");
    long double m0 = 0.0L, m1 = 0.0L, m2 = 0.0L;
    for (std::size_t i = 0; i < axis.size(); ++i) {
        const long double w = static_cast<long double>(density[i]) * dx;
        m0 += w;
        m1 += w * axis[i];
        m2 += w * axis[i] * axis[i];
    }
    if (m0 <= 0.0L) throw validation_error("density_variance: density has no mass");
    const double mean = static_cast<double>(m1 / m0);
    return static_cast<double>(m2 / m0) - mean * mean;
}

} // namespace sqz

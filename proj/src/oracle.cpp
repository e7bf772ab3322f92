// Brute-force density-matrix oracle, kept in its own translation unit so the
// Eigen dependency stays private to the library.

#include <cmath>
#include <sstream>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "sqz/fock.hpp"

namespace sqz {

DensityMatrix oracle_density_matrix(const GaussianState& state, std::size_t truncation,
                                    std::size_t workspace) {
    const GaussianState u = state.to(Convention::Unity);
    const std::size_t min_ws = 4 * (truncation + 1);
    const std::size_t d = workspace == 0 ? 8 * (truncation + 1) : workspace;
    if (d < min_ws) {
        std::ostringstream os;
        os << "oracle_density_matrix: workspace " << d << " below the minimum " << min_ws;
        throw validation_error(os.str());
    }

    // Squeezed-thermal decomposition: e^{2r} = sqrt(v2/v1), 2 nbar + 1 = sqrt(v1 v2).
    const double r = 0.25 * std::log(u.v2() / u.v1());
    const double nbar = std::max(0.0, 0.5 * (std::sqrt(u.v1() * u.v2()) - 1.0));
    const double ratio = nbar / (nbar + 1.0);
    if (nbar > 0.0 && std::pow(ratio, static_cast<double>(d)) > 1e-10) {
        std::ostringstream os;
        os << "oracle_density_matrix: workspace " << d
           << " too small, thermal occupation beyond it exceeds 1e-10 (nbar = " << nbar << ")";
        throw convergence_error(os.str());
    }

    const auto n = static_cast<Eigen::Index>(d);
    Eigen::VectorXd thermal
        = Eigen::VectorXd::Zero(n);
    if (nbar == 0.0) {
        thermal(0) = 1.0;
    } else {
        const double log_ratio = std::log(ratio);
        for (Eigen::Index k = 0; k < n; ++k)
            thermal(k) = std::exp(static_cast<double>(k) * log_ratio) / (nbar + 1.0);
    }

    // Squeeze generator (r/2)(a^2 - a^dag^2): real antisymmetric, so its
    // exponential is a real orthogonal matrix.
    Eigen::MatrixXd gen = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index k = 2; k < n; ++k) {
        const double c = 0.5 * r * std::sqrt(static_cast<double>(k) * static_cast<double>(k - 1));
        gen(k - 2, k) = c;
        gen(k, k - 2) = -c;
    }
    const Eigen::MatrixXd squeeze = gen.exp();
    Eigen::MatrixXd rho = squeeze * thermal.asDiagonal() * squeeze.transpose();
    rho = 0.5 * (rho + rho.transpose()).eval();

    DensityMatrix dm(state, truncation + 1);
    dm.oracle_workspace = d;
    for (std::size_t m = 0; m <= truncation; ++m) {
        for (std::size_t j = 0; j <= truncation; ++j) {
            // The generator couples n to n +/- 2 only, so photon-number parity
            // is conserved exactly; discard the numerical dust that the Pade
            // solve leaves in the structurally zero entries.
            dm.at(m, j) = ((m + j) % 2 == 0)
                              ? rho(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(j))
                              : 0.0;
        }
    }
    dm.trace_deficit = 1.0 - dm.trace();
    dm.truncation_warning = dm.trace_deficit > 0.01;
    return dm;
}

} // namespace sqz

#include "sqz/fock.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace sqz {

namespace {

// log(k!) lookup; covers every truncation this library meets in practice and
// falls back to lgamma beyond it.
double lfact(std::size_t k) {
    constexpr std::size_t kTableSize = 2048;
    static const std::vector<double> table = [] {
        std::vector<double> t(kTableSize);
        for (std::size_t i = 0; i < kTableSize; ++i) t[i] = std::lgamma(static_cast<double>(i) + 1.0);
        return t;
    }();
    if (k < kTableSize) return table[k];
    return std::lgamma(static_cast<double>(k) + 1.0);
}

// Sum exp(log_terms - mx) in ascending order; small contributions first keeps
// the accumulation tight.
double sum_group(std::vector<double>& log_terms, double mx) {
    std::sort(log_terms.begin(), log_terms.end());
    double s = 0.0;
    for (double lt : log_terms) s += std::exp(lt - mx);
    return s;
}

} // namespace

namespace detail {

double fock_entry(double v1_unity, double v2_unity, std::size_t m, std::size_t n) {
    if ((m + n) % 2 != 0) return 0.0; // photon-number parity: pairs only
    if (m < n) std::swap(m, n);       // matrix is symmetric; evaluate the m >= n wedge

    // Half-vacuum-convention variances plus the half quantum of vacuum noise.
    const double vtx = (v1_unity + 1.0) / 2.0;
    const double vtp = (v2_unity + 1.0) / 2.0;
    double u_coef = 1.0 - 1.0 / (2.0 * vtx) - 1.0 / (2.0 * vtp);
    double neg_t = -(1.0 / (4.0 * vtx) - 1.0 / (4.0 * vtp));
    // For pure or quadrature-symmetric states these coefficients are zero up
    // to rounding; snapping them makes the structural zeros (odd P(n) of a
    // pure state, off-diagonals of a thermal state) exact.
    if (std::abs(u_coef) < 1e-14) u_coef = 0.0;
    if (std::abs(neg_t) < 1e-14) neg_t = 0.0;

    const std::size_t k = (m - n) / 2;
    const double pref = 0.5 * (lfact(m) + lfact(n)) - 0.5 * std::log(vtx * vtp);

    // Term a of the sum: (-T)^(k+2a) * U^(n-2a) / (a! (n-2a)! (a+k)!), with
    // magnitudes kept in log space (factorials up to 170! overflow doubles)
    // and signs tracked separately.
    thread_local std::vector<double> pos, neg;
    pos.clear();
    neg.clear();
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a <= n / 2; ++a) {
        const std::size_t et = k + 2 * a;
        const std::size_t eu = n - 2 * a;
        double sign = 1.0;
        double lt = pref;
        if (et > 0) {
            if (neg_t == 0.0) continue;
            if (neg_t < 0.0 && et % 2 == 1) sign = -sign;
            lt += static_cast<double>(et) * std::log(std::abs(neg_t));
        }
        if (eu > 0) {
            if (u_coef == 0.0) continue;
            if (u_coef < 0.0 && eu % 2 == 1) sign = -sign;
            lt += static_cast<double>(eu) * std::log(std::abs(u_coef));
        }
        lt -= lfact(a) + lfact(eu) + lfact(a + k);
        (sign > 0.0 ? pos : neg).push_back(lt);
        mx = std::max(mx, lt);
    }
    if (pos.empty() && neg.empty()) return 0.0;
    const double total = sum_group(pos, mx) - sum_group(neg, mx);
    return total * std::exp(mx);
}

} // namespace detail

double DensityMatrix::trace() const {
    double t = 0.0;
    for (std::size_t i = 0; i < dim; ++i) t += at(i, i);
    return t;
}

double DensityMatrix::trace_of_square() const {
    double t = 0.0;
    for (double e : entries) t += e * e;
    return t;
}

std::vector<double> DensityMatrix::diagonal() const {
    std::vector<double> d(dim);
    for (std::size_t i = 0; i < dim; ++i) d[i] = at(i, i);
    return d;
}

double PhotonDistribution::mean() const {
    double s = 0.0;
    for (std::size_t n = 0; n < probabilities.size(); ++n)
        s += static_cast<double>(n) * probabilities[n];
    return s;
}

double PhotonDistribution::total() const {
    double s = 0.0;
    for (double p : probabilities) s += p;
    return s;
}

DensityMatrix density_matrix(const GaussianState& state, std::size_t truncation) {
    const GaussianState u = state.to(Convention::Unity);
    DensityMatrix dm(state, truncation + 1);
    for (std::size_t m = 0; m <= truncation; ++m) {
        for (std::size_t n = m % 2; n <= m; n += 2) {
            const double val = detail::fock_entry(u.v1(), u.v2(), m, n);
            dm.at(m, n) = val;
            dm.at(n, m) = val;
        }
    }
    dm.trace_deficit = 1.0 - dm.trace();
    dm.truncation_warning = dm.trace_deficit > 0.01;
    return dm;
}

DensityMatrix normalized(const DensityMatrix& dm) {
    const double tr = dm.trace();
    if (!(tr > 0.0)) throw validation_error("normalized: non-positive trace");
    DensityMatrix out = dm;
    for (double& e : out.entries) e /= tr;
    out.trace_deficit = 1.0 - out.trace();
    out.truncation_warning = out.trace_deficit > 0.01;
    return out;
}

DensityMatrix truncate(const DensityMatrix& dm, std::size_t truncation) {
    const std::size_t new_dim = truncation + 1;
    if (new_dim > dm.dim) {
        std::ostringstream os;
        os << "truncate: requested truncation " << truncation << " exceeds matrix dimension "
           << dm.dim;
        throw validation_error(os.str());
    }
    DensityMatrix out(dm.source_state, new_dim);
    for (std::size_t m = 0; m < new_dim; ++m)
        for (std::size_t n = 0; n < new_dim; ++n) out.at(m, n) = dm.at(m, n);
    out.trace_deficit = 1.0 - out.trace();
    out.truncation_warning = out.trace_deficit > 0.01;
    out.oracle_workspace = dm.oracle_workspace;
    return out;
}

PhotonDistribution photon_distribution(const DensityMatrix& dm) {
    std::vector<double> p = dm.diagonal();
    for (double& x : p) {
        if (x < 0.0) {
            if (x < -1e-9) throw validation_error("photon_distribution: negative diagonal entry");
            x = 0.0;
        }
    }
    return PhotonDistribution(dm.source_state, std::move(p));
}

PhotonDistribution photon_distribution(const GaussianState& state, std::size_t truncation) {
    const GaussianState u = state.to(Convention::Unity);
    std::vector<double> p(truncation + 1);
    for (std::size_t n = 0; n <= truncation; ++n)
        p[n] = detail::fock_entry(u.v1(), u.v2(), n, n);
    return PhotonDistribution(state, std::move(p));
}

std::vector<ContrastPoint> oscillation_contrast(const PhotonDistribution& pd, std::size_t max_n) {
    if (max_n + 1 >= pd.probabilities.size()) {
        std::ostringstream os;
        os << "oscillation_contrast: max_n = " << max_n << " needs P(" << max_n + 1
           << ") but the distribution ends at " << pd.probabilities.size() - 1;
        throw validation_error(os.str());
    }
    std::vector<ContrastPoint> out;
    for (std::size_t n = 2; n <= max_n; n += 2) {
        const double below = pd.probabilities[n - 1];
        const double here = pd.probabilities[n];
        const double above = pd.probabilities[n + 1];
        ContrastPoint pt{n, std::nullopt};
        const double odd_avg = 0.5 * (below + above);
        const double denom = here + odd_avg;
        if (denom > 0.0) pt.contrast = std::clamp((here - odd_avg) / denom, -1.0, 1.0);
        out.push_back(pt);
    }
    return out;
}

double conditional_mean_given_click(const PhotonDistribution& pd) {
    double weight = 0.0, weighted_n = 0.0;
    for (std::size_t n = 1; n < pd.probabilities.size(); ++n) {
        weight += pd.probabilities[n];
        weighted_n += static_cast<double>(n) * pd.probabilities[n];
    }
    if (weight <= 0.0)
        throw validation_error("conditional_mean_given_click: distribution has no support above n=0");
    return weighted_n / weight;
}

} // namespace sqz

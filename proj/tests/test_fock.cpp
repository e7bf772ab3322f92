#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstddef>
#include <vector>

#include "golden_matrices.hpp"
#include "sqz/errors.hpp"
#include "sqz/fock.hpp"
#include "sqz/gaussian.hpp"

using namespace sqz;

namespace {

GaussianState golden_state(int i) {
    return GaussianState::from_db(golden::kStatesDb[i][0], golden::kStatesDb[i][1],
                                  Convention::Unity);
}

// The published tables are trace-renormalized truncations: compute wide,
// normalize, then cut down to the printed 11x11 block.
DensityMatrix published_pipeline(const GaussianState& s) {
    return truncate(normalized(density_matrix(s, 170)), golden::kDim - 1);
}

} // namespace

TEST_CASE("the three tabulated matrices are reproduced within half a printout ulp") {
    for (int i = 0; i < golden::kStateCount; ++i) {
        const DensityMatrix dm = published_pipeline(golden_state(i));
        const golden::Matrix& want = *golden::kMatrices[i];
        double worst = 0.0;
        for (std::size_t m = 0; m < golden::kDim; ++m)
            for (std::size_t n = 0; n < golden::kDim; ++n)
                worst = std::max(worst, std::abs(dm.at(m, n) - want[m][n]));
        INFO("state ", i);
        CHECK(worst <= 5e-5);
    }
}

TEST_CASE("vacuum density matrix is exactly |0><0|") {
    const DensityMatrix dm = density_matrix(GaussianState(1.0, 1.0, Convention::Unity), 10);
    CHECK(dm.at(0, 0) == 1.0);
    CHECK(dm.trace_deficit == 0.0);
    for (std::size_t m = 0; m < dm.dim; ++m)
        for (std::size_t n = 0; n < dm.dim; ++n)
            if (m != 0 || n != 0) CHECK(dm.at(m, n) == 0.0);
}

TEST_CASE("entries are independent of the truncation") {
    const GaussianState s = golden_state(1);
    const DensityMatrix small = density_matrix(s, 10);
    const DensityMatrix big = density_matrix(s, 40);
    const DensityMatrix cut = truncate(big, 10);
    REQUIRE(cut.dim == small.dim);
    for (std::size_t i = 0; i < small.entries.size(); ++i)
        CHECK(cut.entries[i] == small.entries[i]); // bit-identical
}

TEST_CASE("odd-parity entries are exactly zero; the matrix is exactly symmetric") {
    const DensityMatrix dm = density_matrix(golden_state(2), 30);
    for (std::size_t m = 0; m < dm.dim; ++m) {
        for (std::size_t n = 0; n < dm.dim; ++n) {
            if ((m + n) % 2 != 0) CHECK(dm.at(m, n) == 0.0);
            CHECK(dm.at(m, n) == dm.at(n, m));
        }
    }
}

TEST_CASE("trace bookkeeping and the truncation warning") {
    const DensityMatrix wide = density_matrix(golden_state(2), 170);
    CHECK(wide.trace() <= 1.0 + 1e-9);
    CHECK(wide.trace_deficit == doctest::Approx(1.0 - wide.trace()).epsilon(1e-12));
    CHECK(wide.trace_deficit == doctest::Approx(3.393542e-5).epsilon(1e-4)); // frozen
    CHECK_FALSE(wide.truncation_warning);

    // The strongly squeezed state loses most of its trace at a tiny cutoff.
    const DensityMatrix narrow = density_matrix(golden_state(2), 10);
    CHECK(narrow.trace_deficit > 0.01);
    CHECK(narrow.truncation_warning);

    const DensityMatrix mild = density_matrix(golden_state(0), 170);
    CHECK(mild.trace_deficit < 1e-12);
    CHECK_FALSE(mild.truncation_warning);
}

TEST_CASE("Cauchy-Schwarz holds entrywise") {
    for (int i = 0; i < golden::kStateCount; ++i) {
        const DensityMatrix dm = density_matrix(golden_state(i), 60);
        for (std::size_t m = 0; m < dm.dim; ++m)
            for (std::size_t n = 0; n < dm.dim; ++n)
                CHECK(dm.at(m, n) * dm.at(m, n) <= dm.at(m, m) * dm.at(n, n) + 1e-9);
    }
}

TEST_CASE("normalized divides by the trace; truncate validates its target") {
    const DensityMatrix dm = density_matrix(golden_state(2), 170);
    const DensityMatrix unit = normalized(dm);
    CHECK(unit.trace() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(unit.at(0, 2) == doctest::Approx(dm.at(0, 2) / dm.trace()).epsilon(1e-15));
    CHECK_THROWS_AS(truncate(dm, 200), validation_error);
    const DensityMatrix cut = truncate(dm, 0);
    CHECK(cut.dim == 1);
    CHECK(cut.at(0, 0) == dm.at(0, 0));
}

TEST_CASE("pure squeezed vacuum has the closed-form photon statistics") {
    const double r = 0.5;
    const GaussianState s(std::exp(-2.0 * r), std::exp(2.0 * r), Convention::Unity);
    const DensityMatrix dm = density_matrix(s, 20);
    const double sech = 1.0 / std::cosh(r);
    const double t = std::tanh(r);
    // P(2n) = (2n)! / (2^n n!)^2 * tanh(r)^(2n) / cosh(r); odd P vanish.
    double factor = 1.0; // (2n)! / (2^n n!)^2
    for (std::size_t n = 0; n <= 9; ++n) {
        if (n > 0) factor *= static_cast<double>(2 * n) * (2 * n - 1) / (4.0 * n * n);
        const double expected = factor * std::pow(t, 2.0 * n) * sech;
        CHECK(dm.at(2 * n, 2 * n) == doctest::Approx(expected).epsilon(1e-12));
        if (n > 0) CHECK(dm.at(2 * n - 1, 2 * n - 1) == 0.0);
    }
    // Rank-1 state: |rho_mn|^2 = rho_mm * rho_nn, and the 0-2 coherence is negative.
    CHECK(dm.at(0, 2) * dm.at(0, 2) == doctest::Approx(dm.at(0, 0) * dm.at(2, 2)).epsilon(1e-12));
    CHECK(dm.at(0, 2) < 0.0);
}

TEST_CASE("wide-cutoff matrices agree with Gaussian purity and mean photon number") {
    for (int i = 0; i < golden::kStateCount; ++i) {
        const GaussianState s = golden_state(i);
        const DensityMatrix dm = density_matrix(s, 170);
        CHECK(std::abs(dm.trace_of_square() - purity(s)) < 1e-3);
        const PhotonDistribution pd = photon_distribution(dm);
        CHECK(std::abs(pd.mean() - mean_photon_number(s)) / mean_photon_number(s) < 1e-3);
    }
}

TEST_CASE("both photon_distribution overloads produce identical numbers") {
    const GaussianState s = golden_state(1);
    const DensityMatrix dm = density_matrix(s, 40);
    const PhotonDistribution from_dm = photon_distribution(dm);
    const PhotonDistribution direct = photon_distribution(s, 40);
    REQUIRE(from_dm.probabilities.size() == direct.probabilities.size());
    for (std::size_t n = 0; n < direct.probabilities.size(); ++n)
        CHECK(from_dm.probabilities[n] == direct.probabilities[n]);
    CHECK(1.0 - direct.total() < 1e-6); // tail beyond N=40 is negligible here
    CHECK(direct.total() <= 1.0 + 1e-12);
}

TEST_CASE("published diagonal facts") {
    // P(1) of the mildest state is 0.0049(1): the published '0.5% single-photon' figure.
    const DensityMatrix dm0 = normalized(density_matrix(golden_state(0), 170));
    CHECK(std::abs(photon_distribution(dm0).probabilities[1] - 0.0049) < 1e-4);
    // The strongly squeezed state has P(10) > P(9): even-odd oscillation.
    const PhotonDistribution pd2 = photon_distribution(normalized(density_matrix(golden_state(2), 170)));
    CHECK(pd2.probabilities[9] == doctest::Approx(0.0148148).epsilon(1e-4));  // frozen
    CHECK(pd2.probabilities[10] == doctest::Approx(0.0318461).epsilon(1e-4)); // frozen
    CHECK(pd2.probabilities[10] > pd2.probabilities[9]);
}

TEST_CASE("oracle agrees with the analytic entries") {
    const GaussianState s = golden_state(1);
    const DensityMatrix dm = density_matrix(s, 10);
    const DensityMatrix od = oracle_density_matrix(s, 10);
    CHECK(od.oracle_workspace == 88); // automatic 8*(N+1)
    double worst = 0.0;
    for (std::size_t i = 0; i < dm.entries.size(); ++i)
        worst = std::max(worst, std::abs(dm.entries[i] - od.entries[i]));
    CHECK(worst < 1e-10);

    // Pure 16 dB squeezing, the hardest case: still far below 1e-4 at the
    // automatic workspace.
    const GaussianState hard = GaussianState::from_db(-16.0, 16.0, Convention::Unity);
    const DensityMatrix hdm = density_matrix(hard, 10);
    const DensityMatrix hod = oracle_density_matrix(hard, 10);
    worst = 0.0;
    for (std::size_t i = 0; i < hdm.entries.size(); ++i)
        worst = std::max(worst, std::abs(hdm.entries[i] - hod.entries[i]));
    CHECK(worst < 1e-6);
}

TEST_CASE("oracle validates its workspace and thermal tail") {
    const GaussianState s = golden_state(1);
    CHECK_THROWS_AS(oracle_density_matrix(s, 10, 30), validation_error); // < 4*(N+1)
    CHECK_NOTHROW(oracle_density_matrix(s, 10, 44));

    // Hot thermal component: the automatic workspace leaves too much tail...
    const GaussianState hot(20.0, 20.0, Convention::Unity);
    CHECK_THROWS_AS(oracle_density_matrix(hot, 10), convergence_error);
    // ...but a generous explicit one converges and matches the direct entries.
    const DensityMatrix od = oracle_density_matrix(hot, 10, 300);
    const DensityMatrix dm = density_matrix(hot, 10);
    double worst = 0.0;
    for (std::size_t i = 0; i < dm.entries.size(); ++i)
        worst = std::max(worst, std::abs(dm.entries[i] - od.entries[i]));
    CHECK(worst < 1e-6);
}

TEST_CASE("oscillation contrast") {
    // Pure squeezed vacuum: odd probabilities vanish, contrast pins at +1.
    const GaussianState pure(std::exp(-2.0), std::exp(2.0), Convention::Unity);
    const PhotonDistribution pd = photon_distribution(pure, 20);
    for (const ContrastPoint& p : oscillation_contrast(pd, 8)) {
        REQUIRE(p.contrast.has_value());
        CHECK(*p.contrast == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(p.n % 2 == 0);
        CHECK(p.n >= 2);
    }

    // Thermal state (v1 = v2 = 3 => nbar = 1): log-convex P(n), contrast < 0.
    const PhotonDistribution th = photon_distribution(GaussianState(3.0, 3.0, Convention::Unity), 30);
    for (const ContrastPoint& p : oscillation_contrast(th, 6)) {
        REQUIRE(p.contrast.has_value());
        CHECK(*p.contrast < 0.0);
    }

    // Uniform distribution: zero contrast at every even n.
    const PhotonDistribution uniform(GaussianState(1.0, 1.0, Convention::Unity),
                                     std::vector<double>(9, 1.0 / 9.0));
    for (const ContrastPoint& p : oscillation_contrast(uniform, 6)) {
        REQUIRE(p.contrast.has_value());
        CHECK(*p.contrast == 0.0);
    }

    // All three neighbors zero: the point is reported but has no value.
    const PhotonDistribution vac(GaussianState(1.0, 1.0, Convention::Unity),
                                 std::vector<double>{1.0, 0.0, 0.0, 0.0, 0.0});
    const auto pts = oscillation_contrast(vac, 2);
    REQUIRE(pts.size() == 1);
    CHECK_FALSE(pts[0].contrast.has_value());

    // max_n must leave room for the n+1 neighbor.
    CHECK_THROWS_AS(oscillation_contrast(vac, 4), validation_error);
}

TEST_CASE("conditional mean given a click") {
    const PhotonDistribution pd(GaussianState(1.0, 1.0, Convention::Unity),
                                std::vector<double>{0.5, 0.25, 0.25});
    CHECK(conditional_mean_given_click(pd) == doctest::Approx(1.5).epsilon(1e-15));

    // Identity against the raw moments: mean / (total - P0).
    const PhotonDistribution g = photon_distribution(golden_state(0), 170);
    CHECK(conditional_mean_given_click(g) ==
          doctest::Approx(g.mean() / (g.total() - g.probabilities[0])).epsilon(1e-12));

    // Far below threshold the clicks come almost exclusively in pairs.
    const GaussianState faint = GaussianState::from_db(-0.001, 0.001, Convention::Unity);
    CHECK(conditional_mean_given_click(photon_distribution(faint, 40)) ==
          doctest::Approx(2.0).epsilon(1e-6));

    const PhotonDistribution vac(GaussianState(1.0, 1.0, Convention::Unity),
                                 std::vector<double>{1.0, 0.0});
    CHECK_THROWS_AS(conditional_mean_given_click(vac), validation_error);
}

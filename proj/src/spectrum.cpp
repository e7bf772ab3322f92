#include "sqz/spectrum.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace sqz {

SpectrumModel::SpectrumModel(double pump_ratio, double eta_gamma, double kappa,
                             std::optional<CavityGeometry> geometry)
    : pump_ratio_(pump_ratio), eta_gamma_(eta_gamma), kappa_(kappa), geometry_(std::move(geometry)) {
    if (!std::isfinite(pump_ratio_) || pump_ratio_ < 0.0 || pump_ratio_ >= 1.0) {
        std::ostringstream os;
        os << "SpectrumModel: pump_ratio = " << pump_ratio_ << " outside [0, 1) (below threshold)";
        throw validation_error(os.str());
    }
    if (!std::isfinite(eta_gamma_) || eta_gamma_ <= 0.0 || eta_gamma_ > 1.0) {
        std::ostringstream os;
        os << "SpectrumModel: eta_gamma = " << eta_gamma_ << " outside (0, 1]";
        throw validation_error(os.str());
    }
    if (!std::isfinite(kappa_) || kappa_ <= 0.0) {
        std::ostringstream os;
        os << "SpectrumModel: kappa = " << kappa_ << " must be positive";
        throw validation_error(os.str());
    }
    if (geometry_) {
        const auto& g = *geometry_;
        if (!(g.transmittance > 0.0) || !(g.round_trip_loss >= 0.0) || !(g.length_m > 0.0))
            throw validation_error("SpectrumModel: cavity geometry fields must be positive");
        const double implied = (g.transmittance + g.round_trip_loss) * speed_of_light / g.length_m;
        if (std::abs(implied - kappa_) > 1e-9 * kappa_) {
            std::ostringstream os;
            os << "SpectrumModel: kappa = " << kappa_ << " inconsistent with geometry-implied "
               << implied << " = (T+L)c/l";
            throw validation_error(os.str());
        }
    }
}

std::pair<double, double> model_variances(const SpectrumModel& model, double f_hz) {
    if (!std::isfinite(f_hz) || f_hz < 0.0) {
        std::ostringstream os;
        os << "model_variances: frequency " << f_hz << " Hz must be non-negative";
        throw validation_error(os.str());
    }
    const double x = std::sqrt(model.pump_ratio());
    const double k = 2.0 * std::numbers::pi * f_hz / model.kappa();
    const double k2 = 4.0 * k * k;
    const double gain = 4.0 * x * model.eta_gamma();
    const double v1 = 1.0 - gain / ((1.0 + x) * (1.0 + x) + k2);
    const double v2 = 1.0 + gain / ((1.0 - x) * (1.0 - x) + k2);
    return {v1, v2};
}

double squeezing_bandwidth(const SpectrumModel& model) {
    if (model.pump_ratio() <= 0.0)
        throw validation_error("squeezing_bandwidth: model has no squeezing (pump_ratio = 0)");
    // v1(f) = 1 - g/((1+x)^2 + 4K^2) reaches the midpoint between v1(0) and 1
    // when 4K^2 = (1+x)^2.
    const double x = std::sqrt(model.pump_ratio());
    return model.kappa() * (1.0 + x) / (4.0 * std::numbers::pi);
}

double squeezing_bandwidth_bisect(const SpectrumModel& model) {
    if (model.pump_ratio() <= 0.0)
        throw validation_error("squeezing_bandwidth: model has no squeezing (pump_ratio = 0)");
    const double v10 = model_variances(model, 0.0).first;
    const double target = v10 + 0.5 * (1.0 - v10);
    double lo = 0.0;
    double hi = model.kappa(); // far beyond the knee: v1 is essentially 1 there
    while (model_variances(model, hi).first < target) hi *= 2.0;
    for (int it = 0; it < 200 && (hi - lo) > 1e-12 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (model_variances(model, mid).first < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

void SpectrumData::validate() const {
    for (std::size_t i = 0; i < frequencies.size(); ++i) {
        if (!std::isfinite(frequencies[i]) || frequencies[i] <= 0.0)
            throw validation_error("SpectrumData: frequencies must be positive and finite");
        if (i > 0 && frequencies[i] <= frequencies[i - 1])
            throw validation_error("SpectrumData: frequencies must be strictly increasing");
    }
    for (const auto* trace : {&v1_obs, &v2_obs}) {
        if (!trace->empty() && trace->size() != frequencies.size())
            throw validation_error("SpectrumData: trace length does not match frequency count");
        for (double v : *trace)
            if (!std::isfinite(v) || v <= 0.0)
                throw validation_error("SpectrumData: variances must be positive and finite");
    }
    if (resolution_bandwidth < 0.0)
        throw validation_error("SpectrumData: resolution_bandwidth must be non-negative");
}

namespace {

// Bounded parameters mapped to free coordinates: logit for the two ratios
// (pump_ratio scaled by its 0.999 cap), log for kappa.
struct ParamTransform {
    static constexpr double kPumpCap = 0.999;

    static double logit(double p) { return std::log(p / (1.0 - p)); }
    static double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

    static std::array<double, 3> to_internal(const SpectrumModel& m) {
        const double p = std::clamp(m.pump_ratio() / kPumpCap, 1e-12, 1.0 - 1e-12);
        const double e = std::clamp(m.eta_gamma(), 1e-12, 1.0 - 1e-12);
        return {logit(p), logit(e), std::log(m.kappa())};
    }
    static SpectrumModel to_model(const std::array<double, 3>& t) {
        // An aggressive trial step must still produce a constructible model:
        // unclamped, sigmoid underflows to an eta_gamma of exactly 0 and exp
        // to a kappa of 0, both of which the constructor rejects.
        auto bounded = [](double v) { return std::clamp(v, -60.0, 60.0); };
        return SpectrumModel(kPumpCap * sigmoid(bounded(t[0])), sigmoid(bounded(t[1])),
                             std::exp(bounded(t[2])));
    }
};

struct ResidualProblem {
    const SpectrumData& data;
    FitTarget which;

    std::vector<double> operator()(const std::array<double, 3>& t) const {
        const SpectrumModel m = ParamTransform::to_model(t);
        std::vector<double> r;
        const bool use1 = which != FitTarget::V2Only;
        const bool use2 = which != FitTarget::V1Only;
        r.reserve(data.frequencies.size() * (use1 + use2));
        for (std::size_t i = 0; i < data.frequencies.size(); ++i) {
            const auto [v1, v2] = model_variances(m, data.frequencies[i]);
            if (use1) r.push_back(10.0 * std::log10(v1 / data.v1_obs[i]));
            if (use2) r.push_back(10.0 * std::log10(v2 / data.v2_obs[i]));
        }
        return r;
    }
};

double sum_sq(const std::vector<double>& r) {
    double s = 0.0;
    for (double x : r) s += x * x;
    return s;
}

// Eigenvalues of a symmetric 3x3 via cyclic Jacobi; used only to detect a
// flat residual surface, so modest precision is plenty.
std::array<double, 3> symmetric_eigenvalues3(std::array<std::array<double, 3>, 3> a) {
    for (int sweep = 0; sweep < 50; ++sweep) {
        double off = std::abs(a[0][1]) + std::abs(a[0][2]) + std::abs(a[1][2]);
        if (off < 1e-300) break;
        for (int p = 0; p < 2; ++p) {
            for (int q = p + 1; q < 3; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                const double theta = 0.5 * std::atan2(2.0 * a[p][q], a[q][q] - a[p][p]);
                const double c = std::cos(theta), s = std::sin(theta);
                for (int k = 0; k < 3; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (int k = 0; k < 3; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    return {a[0][0], a[1][1], a[2][2]};
}

} // namespace

FitResult fit_spectrum(const SpectrumData& data, const SpectrumModel& init, FitTarget which) {
    data.validate();
    const std::size_t npts = data.frequencies.size();
    const bool use1 = which != FitTarget::V2Only;
    const bool use2 = which != FitTarget::V1Only;
    if (use1 && (data.v1_obs.size() != npts || npts < 3))
        throw validation_error("fit_spectrum: need at least 3 v1 observations");
    if (use2 && (data.v2_obs.size() != npts || npts < 3))
        throw validation_error("fit_spectrum: need at least 3 v2 observations");

    const ResidualProblem problem{data, which};
    std::array<double, 3> t = ParamTransform::to_internal(init);
    std::vector<double> r = problem(t);
    double ssq = sum_sq(r);
    const std::size_t nres = r.size();

    auto jacobian = [&](const std::array<double, 3>& at) {
        std::vector<std::array<double, 3>> j(nres);
        for (int p = 0; p < 3; ++p) {
            const double h = 1e-6 * (1.0 + std::abs(at[p]));
            auto tp = at, tm = at;
            tp[p] += h;
            tm[p] -= h;
            const auto rp = problem(tp), rm = problem(tm);
            for (std::size_t i = 0; i < nres; ++i) j[i][p] = (rp[i] - rm[i]) / (2.0 * h);
        }
        return j;
    };

    bool improved = false;
    std::size_t iterations = 0;
    double lambda = 1e-3;
    for (; iterations < 200; ++iterations) {
        const auto j = jacobian(t);
        // normal equations
        std::array<std::array<double, 3>, 3> jtj{};
        std::array<double, 3> jtr{};
        for (std::size_t i = 0; i < nres; ++i) {
            for (int p = 0; p < 3; ++p) {
                jtr[p] += j[i][p] * r[i];
                for (int q = 0; q < 3; ++q) jtj[p][q] += j[i][p] * j[i][q];
            }
        }
        bool stepped = false;
        for (int attempt = 0; attempt < 40; ++attempt) {
            auto a = jtj;
            for (int p = 0; p < 3; ++p) a[p][p] += lambda * std::max(jtj[p][p], 1e-12);
            // solve a * delta = -jtr (Gaussian elimination, partial pivoting)
            std::array<double, 3> b{-jtr[0], -jtr[1], -jtr[2]};
            std::array<int, 3> piv{0, 1, 2};
            bool singular = false;
            for (int col = 0; col < 3; ++col) {
                int best = col;
                for (int row = col + 1; row < 3; ++row)
                    if (std::abs(a[piv[row]][col]) > std::abs(a[piv[best]][col])) best = row;
                std::swap(piv[col], piv[best]);
                const double d = a[piv[col]][col];
                if (std::abs(d) < 1e-300) {
                    singular = true;
                    break;
                }
                for (int row = col + 1; row < 3; ++row) {
                    const double f = a[piv[row]][col] / d;
                    for (int cc = col; cc < 3; ++cc) a[piv[row]][cc] -= f * a[piv[col]][cc];
                    b[piv[row]] -= f * b[piv[col]];
                }
            }
            std::array<double, 3> delta{};
            if (!singular) {
                for (int col = 2; col >= 0; --col) {
                    double s = b[piv[col]];
                    for (int cc = col + 1; cc < 3; ++cc) s -= a[piv[col]][cc] * delta[cc];
                    delta[col] = s / a[piv[col]][col];
                }
                auto tt = t;
                for (int p = 0; p < 3; ++p) tt[p] += delta[p];
                const auto rr = problem(tt);
                const double ss = sum_sq(rr);
                if (ss < ssq) {
                    t = tt;
                    r = rr;
                    ssq = ss;
                    improved = true;
                    stepped = true;
                    lambda = std::max(lambda * 0.35, 1e-12);
                    break;
                }
            }
            lambda *= 8.0;
            if (lambda > 1e13) break;
        }
        if (!stepped) break;
        if (ssq < 1e-24) break;
    }

    // Conditioning of the quadratic model at the optimum: a (near-)zero
    // eigenvalue of J^T J means a direction the data does not constrain.
    const auto j = jacobian(t);
    std::array<std::array<double, 3>, 3> jtj{};
    for (std::size_t i = 0; i < nres; ++i)
        for (int p = 0; p < 3; ++p)
            for (int q = 0; q < 3; ++q) jtj[p][q] += j[i][p] * j[i][q];
    auto ev = symmetric_eigenvalues3(jtj);
    const double emax = std::max({std::abs(ev[0]), std::abs(ev[1]), std::abs(ev[2])});
    const double emin = std::min({std::abs(ev[0]), std::abs(ev[1]), std::abs(ev[2])});
    const bool degenerate = emax <= 0.0 || emin / emax < 1e-6;

    if (!improved) return FitResult{init, sum_sq(problem(ParamTransform::to_internal(init))),
                                    false, degenerate, iterations};
    return FitResult{ParamTransform::to_model(t), ssq, true, degenerate, iterations};
}

namespace {

// Fixed-order pairwise tree; bit-stable regardless of how the caller might
// partition the work.
double pairwise_sum(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
    if (hi - lo <= 8) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += v[i];
        return s;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

} // namespace

RateResult spectral_photon_rate(const SpectrumModel& model, double half_fsr_hz,
                                double bin_width_hz, std::size_t fock_truncation) {
    if (!std::isfinite(half_fsr_hz) || half_fsr_hz <= 0.0)
        throw validation_error("spectral_photon_rate: half_fsr must be positive");
    if (!std::isfinite(bin_width_hz) || bin_width_hz <= 0.0)
        throw validation_error("spectral_photon_rate: bin_width must be positive");
    const double nb_real = half_fsr_hz / bin_width_hz;
    const auto nb = static_cast<std::size_t>(std::llround(nb_real));
    if (nb == 0 || std::abs(nb_real - static_cast<double>(nb)) > 1e-9 * nb_real) {
        std::ostringstream os;
        os << "spectral_photon_rate: half_fsr / bin_width = " << nb_real
           << " must be an integer number of bins";
        throw validation_error(os.str());
    }

    const std::size_t cap = fock_truncation;
    const std::size_t low_tier = std::min<std::size_t>(50, cap);

    std::vector<double> bin_means(nb, 0.0);
    std::vector<double> weighted(cap + 1, 0.0);
    double max_deficit = 0.0;
    std::size_t worst_bin = 0;

    for (std::size_t i = 0; i < nb; ++i) {
        const double f = (static_cast<double>(i) + 0.5) * bin_width_hz;
        const auto [v1, v2] = model_variances(model, f);
        const double mean_analytic = (v1 + v2) / 4.0 - 0.5;
        const std::size_t tier = mean_analytic < 5.0 ? low_tier : cap;

        double total = 0.0, mean = 0.0;
        for (std::size_t n = 0; n <= tier; ++n) {
            const double p = detail::fock_entry(v1, v2, n, n);
            total += p;
            mean += static_cast<double>(n) * p;
            weighted[n] += p;
        }
        const double deficit = 1.0 - total;
        if (deficit > max_deficit) {
            max_deficit = deficit;
            worst_bin = i;
        }
        if (deficit > 0.01) {
            std::ostringstream os;
            os << "spectral_photon_rate: bin " << i << " (center " << f
               << " Hz) loses " << deficit
               << " of its trace at truncation " << tier << "; increase fock_truncation";
            throw convergence_error(os.str());
        }
        bin_means[i] = mean;
    }
    (void)worst_bin;

    const double rate = pairwise_sum(bin_means, 0, nb) * bin_width_hz;
    const double power = rate * photon_energy_1064nm;

    for (double& w : weighted) w /= static_cast<double>(nb);
    const auto [v1c, v2c] = model_variances(model, 0.5 * bin_width_hz);
    PhotonDistribution dist(GaussianState(v1c, v2c, Convention::Unity), std::move(weighted));

    // A zero-gain model yields an exact vacuum in every bin; the conditional
    // mean is then vacuously 0 rather than an error.
    double cond = 0.0;
    bool any_photons = false;
    for (std::size_t n = 1; n < dist.probabilities.size(); ++n)
        if (dist.probabilities[n] > 0.0) any_photons = true;
    if (any_photons) cond = conditional_mean_given_click(dist);

    return RateResult{rate, power, std::move(dist), cond, max_deficit, nb};
}

} // namespace sqz

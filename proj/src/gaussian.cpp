#include "sqz/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace sqz {

double vacuum_variance(Convention c) {
    switch (c) {
        case Convention::Quarter: return 0.25;
        case Convention::Half: return 0.5;
        case Convention::Unity: return 1.0;
    }
    return 1.0;
}

const char* convention_name(Convention c) {
    switch (c) {
        case Convention::Quarter: return "quarter";
        case Convention::Half: return "half";
        case Convention::Unity: return "unity";
    }
    return "unity";
}

double db_to_linear(double v_db) {
    if (!std::isfinite(v_db)) throw validation_error("db_to_linear: dB value must be finite");
    return std::pow(10.0, v_db / 10.0);
}

double linear_to_db(double ratio) {
    if (!std::isfinite(ratio) || ratio <= 0.0)
        throw validation_error("linear_to_db: ratio must be positive and finite");
    return 10.0 * std::log10(ratio);
}

GaussianState::GaussianState(double v1, double v2, Convention conv)
    : v1_(v1), v2_(v2), conv_(conv) {
    if (!std::isfinite(v1) || !std::isfinite(v2) || v1 <= 0.0 || v2 <= 0.0) {
        std::ostringstream os;
        os << "GaussianState: variances must be positive and finite (v1=" << v1
           << ", v2=" << v2 << ")";
        throw validation_error(os.str());
    }
    const double vac = vacuum_variance(conv);
    const double bound = vac * vac;
    const double product = v1_ * v2_;
    if (product < bound) {
        if (product < bound * (1.0 - 1e-12)) {
            std::ostringstream os;
            os << "GaussianState: v1*v2 = " << product << " violates the Heisenberg bound "
               << bound << " in the " << convention_name(conv) << " convention (v1=" << v1
               << ", v2=" << v2 << ")";
            throw validation_error(os.str());
        }
        // dB tables round to a few decimals; nudge symmetrically onto the bound
        const double scale = std::sqrt(bound / product);
        v1_ *= scale;
        v2_ *= scale;
    }
}

GaussianState GaussianState::from_db(double v1_db, double v2_db, Convention conv) {
    const double vac = vacuum_variance(conv);
    return GaussianState(vac * db_to_linear(v1_db), vac * db_to_linear(v2_db), conv);
}

GaussianState GaussianState::to(Convention target) const {
    if (target == conv_) return *this;
    // The vacuum variances are 1/4, 1/2, 1: the ratio is a power of two, so
    // the scaling below is exact in binary floating point.
    const double ratio = vacuum_variance(target) / vacuum_variance(conv_);
    return GaussianState(v1_ * ratio, v2_ * ratio, target);
}

double GaussianState::v1_db() const { return linear_to_db(v1_ / vacuum_variance(conv_)); }
double GaussianState::v2_db() const { return linear_to_db(v2_ / vacuum_variance(conv_)); }

bool GaussianState::is_vacuum() const {
    const double vac = vacuum_variance(conv_);
    return v1_ == vac && v2_ == vac;
}

LossChannel::LossChannel(double eta_gamma_) : eta_gamma(eta_gamma_) {
    if (!std::isfinite(eta_gamma) || eta_gamma <= 0.0 || eta_gamma > 1.0) {
        std::ostringstream os;
        os << "LossChannel: eta_gamma = " << eta_gamma_ << " outside (0, 1]";
        throw validation_error(os.str());
    }
}

GaussianState apply_loss(const GaussianState& pure, const LossChannel& loss) {
    const GaussianState u = pure.to(Convention::Unity);
    const double e = loss.eta_gamma;
    return GaussianState(e * u.v1() + (1.0 - e), e * u.v2() + (1.0 - e), Convention::Unity);
}

namespace {

// Least-squares objective for a common vacuum admixture: with
// V'_i = (V_i - (1-e))/e, the residual per pair is ln(V1' V2'), which
// vanishes when the de-lossed pair is minimum-uncertainty.
struct LossObjective {
    const std::vector<std::pair<double, double>>& pairs;

    double residual(std::size_t i, double e) const {
        const auto& [a, b] = pairs[i];
        return std::log(a - 1.0 + e) + std::log(b - 1.0 + e) - 2.0 * std::log(e);
    }
    double residual_deriv(std::size_t i, double e) const {
        const auto& [a, b] = pairs[i];
        return 1.0 / (a - 1.0 + e) + 1.0 / (b - 1.0 + e) - 2.0 / e;
    }
    double value(double e) const {
        double s = 0.0;
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            const double r = residual(i, e);
            s += r * r;
        }
        return s;
    }
    double deriv(double e) const {
        double s = 0.0;
        for (std::size_t i = 0; i < pairs.size(); ++i)
            s += 2.0 * residual(i, e) * residual_deriv(i, e);
        return s;
    }
};

} // namespace

LossInference infer_loss(const std::vector<GaussianState>& measured_pairs) {
    if (measured_pairs.empty()) throw validation_error("infer_loss: no measured pairs given");

    std::vector<std::pair<double, double>> pairs;
    pairs.reserve(measured_pairs.size());
    double lo = 0.0; // eta_gamma must exceed max(1 - V1) so every V1' stays positive
    for (std::size_t i = 0; i < measured_pairs.size(); ++i) {
        const GaussianState u = measured_pairs[i].to(Convention::Unity);
        if (u.v1() >= 1.0) {
            std::ostringstream os;
            os << "infer_loss: pair " << i << " has V1 = " << u.v1()
               << " >= 1 (no squeezing, loss unidentifiable)";
            throw validation_error(os.str());
        }
        if (u.v2() <= 1.0) {
            std::ostringstream os;
            os << "infer_loss: pair " << i << " has V2 = " << u.v2() << " <= 1 (no anti-squeezing)";
            throw validation_error(os.str());
        }
        pairs.emplace_back(u.v1(), u.v2());
        lo = std::max(lo, 1.0 - u.v1());
    }

    const LossObjective obj{pairs};
    double best;
    if (pairs.size() == 1) {
        // Exact: solve V1'V2' = 1, linear in e after expansion.
        const auto& [a, b] = pairs[0];
        best = 1.0 - (a * b - 1.0) / (a + b - 2.0);
        best = std::clamp(best, std::nextafter(lo, 1.0), 1.0);
    } else {
        // The objective blows up at the lower edge and is smooth and unimodal
        // inside for physical inputs: coarse scan, then bisect the derivative.
        constexpr int kScan = 2048;
        const double span = 1.0 - lo;
        double fbest = std::numeric_limits<double>::infinity();
        int kbest = 0;
        std::vector<double> es(kScan);
        for (int k = 0; k < kScan; ++k) {
            es[k] = lo + span * (k + 1) / kScan;
            const double f = obj.value(es[k]);
            if (f < fbest) {
                fbest = f;
                kbest = k;
            }
        }
        if (kbest == kScan - 1 && obj.deriv(1.0) <= 0.0) {
            best = 1.0; // still decreasing at the right edge: boundary optimum
        } else {
            double a = es[std::max(0, kbest - 1)];
            double b = es[std::min(kScan - 1, kbest + 1)];
            double da = obj.deriv(a);
            for (int it = 0; it < 200 && b - a > 1e-16; ++it) {
                const double m = 0.5 * (a + b);
                const double dm = obj.deriv(m);
                if ((da <= 0.0) == (dm <= 0.0)) {
                    a = m;
                    da = dm;
                } else {
                    b = m;
                }
            }
            best = 0.5 * (a + b);
        }
    }

    LossInference out{LossChannel(best), {}, obj.value(best)};
    out.pure_pairs.reserve(pairs.size());
    for (const auto& [a, b] : pairs)
        out.pure_pairs.emplace_back((a - 1.0 + best) / best, (b - 1.0 + best) / best);
    return out;
}

double purity(const GaussianState& s) {
    const double mu = vacuum_variance(s.convention()) / std::sqrt(s.v1() * s.v2());
    return std::min(mu, 1.0);
}

double mean_photon_number(const GaussianState& s) {
    const GaussianState u = s.to(Convention::Unity);
    return std::max(0.0, (u.v1() + u.v2()) / 4.0 - 0.5);
}

} // namespace sqz

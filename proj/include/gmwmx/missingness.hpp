#ifndef GMWMX_MISSINGNESS_HPP
#define GMWMX_MISSINGNESS_HPP

#include <cstdint>
#include <vector>

#include "gmwmx/errors.hpp"
#include "gmwmx/rng.hpp"

namespace gmwmx {

/// Two-state stationary Markov observation process Z (1 = observed):
///   P(miss | observed) = p1,  P(observed | miss) = p2.
struct MissingnessModel {
    double p1 = 0.0;
    double p2 = 1.0;

    /// E[Z] = p2/(p1+p2); 1 when p1 = 0 (never transitions to missing).
    double mean() const {
        if (p1 + p2 <= 0.0) throw DegenerateChain("p1 = p2 = 0");
        if (p1 == 0.0) return 1.0;
        return p2 / (p1 + p2);
    }

    /// One-step agreement probability P(Z_2 = Z_1) at stationarity.
    double agreement() const {
        const double mu = mean();
        return (1.0 - p1) * mu + (1.0 - p2) * (1.0 - mu);
    }

    /// Geometric decay rate of the lag autocovariance, 1 - p1 - p2.
    double decay() const { return 1.0 - p1 - p2; }

    void validate() const {
        if (p1 < 0.0 || p1 >= 1.0 || p2 <= 0.0 || p2 > 1.0)
            throw Error(Error::Kind::Usage, "missingness requires p1 in [0,1), p2 in (0,1]");
    }
};

inline double stationary_mean(const MissingnessModel& m) { return m.mean(); }

/// Lag autocovariances Lambda_k = mu(1-mu)(1-p1-p2)^k, k = 0..n-1.
inline std::vector<double> lag_autocovariance(const MissingnessModel& m, std::size_t n) {
    const double mu = m.mean();
    const double r = m.decay();
    std::vector<double> lam(n);
    double pw = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        lam[k] = mu * (1.0 - mu) * pw;
        pw *= r;
    }
    return lam;
}

/// Transition-frequency estimator of (p1, p2); (0, 1) when nothing is
/// missing, estimates clamped to [1e-6, 1-1e-6] otherwise.
inline MissingnessModel estimate_missingness(const std::vector<std::uint8_t>& z) {
    if (z.size() < 2) throw Error(Error::Kind::Usage, "need at least 2 observations");
    std::size_t ones = 0;
    for (auto v : z) ones += v;
    if (ones == 0) throw AllMissing("mask is identically zero");
    if (ones == z.size()) return {0.0, 1.0};

    std::size_t n10 = 0, n01 = 0, from1 = 0, from0 = 0;
    for (std::size_t i = 0; i + 1 < z.size(); ++i) {
        if (z[i]) {
            ++from1;
            if (!z[i + 1]) ++n10;
        } else {
            ++from0;
            if (z[i + 1]) ++n01;
        }
    }
    const double lo = 1e-6, hi = 1.0 - 1e-6;
    auto clamp = [&](double x) { return x < lo ? lo : (x > hi ? hi : x); };
    MissingnessModel m;
    m.p1 = from1 ? clamp(static_cast<double>(n10) / static_cast<double>(from1)) : lo;
    m.p2 = from0 ? clamp(static_cast<double>(n01) / static_cast<double>(from0)) : hi;
    return m;
}

/// Stationary-start Markov sample; deterministic given the seed.
inline std::vector<std::uint8_t> simulate(const MissingnessModel& m, std::size_t n,
                                          std::uint64_t seed) {
    m.validate();
    Rng rng(seed);
    const double mu = m.mean();
    std::vector<std::uint8_t> z(n);
    if (n == 0) return z;
    z[0] = rng.uniform() < mu ? 1 : 0;
    for (std::size_t i = 1; i < n; ++i) {
        const double u = rng.uniform();
        z[i] = z[i - 1] ? (u < m.p1 ? 0 : 1) : (u < m.p2 ? 1 : 0);
    }
    return z;
}

/// Inverts (mu, agreement rho) back to the transition probabilities, using
/// p1 mu = p2 (1 - mu) at stationarity: p1 = (1-rho)/(2mu), p2 = (1-rho)/(2(1-mu)).
inline MissingnessModel from_mean_and_agreement(double mu, double rho) {
    MissingnessModel m;
    m.p1 = (1.0 - rho) / (2.0 * mu);
    m.p2 = (1.0 - rho) / (2.0 * (1.0 - mu));
    return m;
}

} // namespace gmwmx

#endif

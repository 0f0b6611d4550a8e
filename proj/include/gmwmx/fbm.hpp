#ifndef GMWMX_FBM_HPP
#define GMWMX_FBM_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "gmwmx/errors.hpp"
#include "gmwmx/rng.hpp"

namespace gmwmx {

/// Lower Cholesky factor of the fBM covariance on the grid u_i = i/m,
/// i = 1..m, with Cov(B(s), B(t)) = (s^{2H} + t^{2H} - |t-s|^{2H})/2.
inline Eigen::MatrixXd fbm_cholesky(double hurst, std::size_t m) {
    Eigen::MatrixXd c(m, m);
    const double h2 = 2.0 * hurst;
    for (std::size_t i = 0; i < m; ++i) {
        const double s = static_cast<double>(i + 1) / static_cast<double>(m);
        for (std::size_t j = 0; j <= i; ++j) {
            const double t = static_cast<double>(j + 1) / static_cast<double>(m);
            const double v = 0.5 * (std::pow(s, h2) + std::pow(t, h2) - std::pow(s - t, h2));
            c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
            c(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
        }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(c);
    if (llt.info() != Eigen::Success) throw FactorizationFailure("fBM covariance not PSD");
    return llt.matrixL();
}

/// One standard fBM path at u = 1/m .. 1, exact in distribution.
inline std::vector<double> simulate_fbm(const Eigen::MatrixXd& chol, Rng& rng) {
    const Eigen::Index m = chol.rows();
    Eigen::VectorXd w(m);
    for (Eigen::Index i = 0; i < m; ++i) w(i) = rng.gaussian();
    Eigen::VectorXd b = chol.template triangularView<Eigen::Lower>() * w;
    return std::vector<double>(b.data(), b.data() + m);
}

/// Monte Carlo quantile table of the long-memory limit statistic
/// C^{-1} integral G(u) dB^d(u) per design coefficient.
struct QuantileTable {
    std::vector<double> probs{0.025, 0.05, 0.5, 0.95, 0.975};
    Eigen::MatrixXd quantiles; // p x probs
    Eigen::VectorXd mc_sd;     // per-coefficient Monte Carlo standard deviation
};

/// Simulates the Theorem-style limit of n^{-d} D^{1/2} (beta_hat - beta):
/// regressor functions G_i(j/n) = X_{j,i}/sqrt(mean(X_i^2)), the matrix
/// C_n = D^{-1/2} X^T X D^{-1/2}, and a Riemann-Stieltjes sum against an
/// exactly simulated fBM with Hurst index d + 1/2.
inline QuantileTable long_memory_quantiles(const Eigen::MatrixXd& x, double d, std::size_t reps,
                                           std::uint64_t seed) {
    if (!(d > 0.0 && d < 0.5)) throw Error(Error::Kind::Usage, "d must lie in (0, 1/2)");
    const std::size_t n = static_cast<std::size_t>(x.rows());
    const Eigen::Index p = x.cols();

    Eigen::VectorXd col_norm(p);
    for (Eigen::Index c = 0; c < p; ++c)
        col_norm(c) = std::sqrt(x.col(c).squaredNorm() / static_cast<double>(n));
    Eigen::MatrixXd g = x;
    for (Eigen::Index c = 0; c < p; ++c) g.col(c) /= col_norm(c);
    Eigen::MatrixXd cn = g.transpose() * g / static_cast<double>(n);
    Eigen::MatrixXd cninv = cn.inverse();

    const Eigen::MatrixXd chol = fbm_cholesky(d + 0.5, n);
    Eigen::MatrixXd stats(p, static_cast<Eigen::Index>(reps));
    Rng rng(seed);
    Eigen::VectorXd b_prev(n), db(n);
    for (std::size_t r = 0; r < reps; ++r) {
        auto b = simulate_fbm(chol, rng);
        double prev = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            db(static_cast<Eigen::Index>(j)) = b[j] - prev;
            prev = b[j];
        }
        stats.col(static_cast<Eigen::Index>(r)) = cninv * (g.transpose() * db);
    }

    QuantileTable table;
    table.quantiles.resize(p, static_cast<Eigen::Index>(table.probs.size()));
    table.mc_sd.resize(p);
    std::vector<double> row(reps);
    for (Eigen::Index i = 0; i < p; ++i) {
        for (std::size_t r = 0; r < reps; ++r) row[r] = stats(i, static_cast<Eigen::Index>(r));
        std::sort(row.begin(), row.end());
        for (std::size_t q = 0; q < table.probs.size(); ++q) {
            const double pos = table.probs[q] * static_cast<double>(reps - 1);
            const std::size_t lo = static_cast<std::size_t>(pos);
            const double frac = pos - static_cast<double>(lo);
            const double val = lo + 1 < reps ? (1.0 - frac) * row[lo] + frac * row[lo + 1] : row[lo];
            table.quantiles(i, static_cast<Eigen::Index>(q)) = val;
        }
        double mean = 0.0, m2 = 0.0;
        for (double v : row) mean += v;
        mean /= static_cast<double>(reps);
        for (double v : row) m2 += (v - mean) * (v - mean);
        table.mc_sd(i) = std::sqrt(m2 / static_cast<double>(reps - 1));
    }
    return table;
}

/// Standard normal quantile by Newton iteration on erfc (double precision).
inline double normal_quantile(double prob) {
    if (!(prob > 0.0 && prob < 1.0)) throw Error(Error::Kind::Usage, "quantile prob in (0,1)");
    double lo = -40.0, hi = 40.0;
    auto cdf = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (cdf(mid) < prob)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace gmwmx

#endif

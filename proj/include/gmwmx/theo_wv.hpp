#ifndef GMWMX_THEO_WV_HPP
#define GMWMX_THEO_WV_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/QR>

#include "gmwmx/errors.hpp"
#include "gmwmx/fft.hpp"
#include "gmwmx/linalg.hpp"
#include "gmwmx/missingness.hpp"
#include "gmwmx/noise_model.hpp"
#include "gmwmx/wavelet.hpp"

namespace gmwmx {

/// Explicit n x n filter matrix A_j = M_j^{-1} sum_i f_i f_i^T where f_i is
/// the Haar filter placed at offset i. Oracle/testing sizes only.
inline Eigen::MatrixXd filter_matrix_oracle(int j, std::size_t n) {
    const HaarFilter f = haar_filter(j);
    const std::size_t lj = f.length();
    if (n < lj) throw SeriesTooShort("n < filter length");
    const std::size_t m = n - lj + 1;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t r = 0; r < lj; ++r)
            for (std::size_t c = 0; c < lj; ++c) a(i + r, i + c) += f.taps[r] * f.taps[c];
    a /= static_cast<double>(m);
    return a;
}

/// Banded elementwise trace tr[A_j Sigma] without forming the product.
inline double banded_trace(const Eigen::MatrixXd& a, const Eigen::MatrixXd& sigma,
                           std::size_t bandwidth) {
    const std::size_t n = static_cast<std::size_t>(a.rows());
    double acc = a.diagonal().dot(sigma.diagonal());
    for (std::size_t k = 1; k < bandwidth && k < n; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i + k < n; ++i) s += a(i, i + k) * sigma(i, i + k);
        acc += 2.0 * s;
    }
    return acc;
}

/// Theoretical WV by the exact trace form nu_j = tr[A_j Sigma(gamma)].
/// Sigma is built densely (Toeplitz from the autocovariance, or sigma2 U^T U
/// for the non-stationary power-law part). Intended as the slow oracle.
inline std::vector<double> theoretical_wv_trace(const NoiseModel& model, std::size_t n, int scales,
                                                std::size_t cap = 4096) {
    if (n > cap) throw OracleSizeExceeded("trace oracle capped at n = " + std::to_string(cap));
    if ((static_cast<std::size_t>(1) << scales) > n)
        throw ScaleBudgetExceeded("2^J exceeds series length");
    const Eigen::MatrixXd sigma = covariance_matrix(model, n);
    std::vector<double> nu(static_cast<std::size_t>(scales));
    for (int j = 1; j <= scales; ++j) {
        const Eigen::MatrixXd a = filter_matrix_oracle(j, n);
        nu[static_cast<std::size_t>(j - 1)] = banded_trace(a, sigma, filter_length(j));
    }
    return nu;
}

/// Haar filter autocorrelation c_j(k) = sum_l h_l h_{l+k}, k = 0..L_j-1,
/// generated numerically from the taps and cached per scale.
inline const std::vector<double>& haar_autocorrelation(int j) {
    static std::map<int, std::vector<double>> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(j);
    if (it != cache.end()) return it->second;
    const HaarFilter f = haar_filter(j);
    const std::size_t lj = f.length();
    std::vector<double> c(lj, 0.0);
    for (std::size_t k = 0; k < lj; ++k) {
        double acc = 0.0;
        for (std::size_t l = 0; l + k < lj; ++l) acc += f.taps[l] * f.taps[l + k];
        c[k] = acc;
    }
    return cache.emplace(j, std::move(c)).first->second;
}

/// Fast WV from diagonal averages a_k (rho(k) or d_k):
///   nu_j = c_j(0) a_0 + 2 sum_{k>=1} c_j(k) a_k.
/// Exact whenever the underlying covariance matrix is Toeplitz; for
/// non-stationary models this is the per-lag-averaged surrogate used
/// throughout the scalable pipeline.
inline std::vector<double> theoretical_wv_fast(const CovarianceSummary& summary, std::size_t n,
                                               int scales) {
    const std::size_t lmax = filter_length(scales);
    if (summary.size() < lmax)
        throw InsufficientLags("summary has " + std::to_string(summary.size()) +
                               " lags, scale J needs " + std::to_string(lmax));
    if (lmax > n) throw ScaleBudgetExceeded("2^J exceeds series length");
    std::vector<double> nu(static_cast<std::size_t>(scales));
    for (int j = 1; j <= scales; ++j) {
        const auto& c = haar_autocorrelation(j);
        double acc = c[0] * summary.seq[0];
        for (std::size_t k = 1; k < c.size(); ++k) acc += 2.0 * c[k] * summary.seq[k];
        nu[static_cast<std::size_t>(j - 1)] = acc;
    }
    return nu;
}

/// Adjusts diagonal averages for the missingness process and evaluates the
/// fast WV: a'_k = a_k (Lambda_k + mu^2). Valid because Lambda + mu^2 11^T is
/// Toeplitz, so the Hadamard product acts lag by lag.
inline CovarianceSummary missingness_adjust(const CovarianceSummary& summary,
                                            const MissingnessModel& m) {
    const double mu = m.mean();
    const std::vector<double> lam = lag_autocovariance(m, summary.size());
    CovarianceSummary out = summary;
    out.mode = CovarianceSummary::Mode::NonStationary;
    for (std::size_t k = 0; k < out.seq.size(); ++k) out.seq[k] *= lam[k] + mu * mu;
    return out;
}

inline std::vector<double> missingness_adjusted_wv(const CovarianceSummary& summary,
                                                   const MissingnessModel& m, std::size_t n,
                                                   int scales) {
    return theoretical_wv_fast(missingness_adjust(summary, m), n, scales);
}

// ---------------------------------------------------------------------------
// Residual-projection correction
// ---------------------------------------------------------------------------

/// Grid of n* = 1 + 3 floor(log2 n) lags, geometrically spaced with both
/// endpoints forced (first = 0, last = n-1).
inline std::vector<std::size_t> correction_grid(std::size_t n) {
    int log2n = 0;
    while ((static_cast<std::size_t>(2) << log2n) <= n) ++log2n;
    const std::size_t count = 1 + 3 * static_cast<std::size_t>(log2n);
    std::vector<std::size_t> grid;
    grid.reserve(count);
    grid.push_back(0);
    for (std::size_t t = 0; grid.size() < count - 1; ++t) {
        std::size_t g = static_cast<std::size_t>(std::llround(std::pow(2.0, t / 3.0)));
        if (g <= grid.back()) g = grid.back() + 1;
        if (g >= n - 1) break;
        grid.push_back(g);
    }
    while (grid.size() < count - 1) grid.push_back(grid.back() + 1);
    grid.push_back(n - 1);
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (grid[i] <= grid[i - 1]) grid[i] = grid[i - 1] + 1;
    if (grid.back() > n - 1) throw Error(Error::Kind::Usage, "series too short for lag grid");
    return grid;
}

/// Design-dependent precomputation for the Appendix-style residual WV
/// correction. For each grid lag l the diagonal sums of R Sigma are a fixed
/// linear functional of the lag sequence a:
///   S_l = sum_j kappa_l(j) a(j),
/// with kappa built from full and truncated diagonal sums of R = I - QQ^T.
/// Everything here is independent of the noise parameters, so objective
/// evaluations only pay one O(n) dot product per grid lag.
class ResidualCorrection {
public:
    ResidualCorrection() = default;

    /// X is the full design; rank-checked via column-pivoted QR.
    ResidualCorrection(const Eigen::MatrixXd& x, std::size_t n) : n_(n) {
        if (static_cast<std::size_t>(x.rows()) != n)
            throw Error(Error::Kind::Usage, "design rows != n");
        p_ = static_cast<std::size_t>(x.cols());
        grid_ = correction_grid(n);
        if (p_ == 0) { // no regression: R = I, correction vanishes
            identity_ = true;
            return;
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
        if (static_cast<std::size_t>(qr.rank()) < p_)
            throw RankDeficientDesign("design rank " + std::to_string(qr.rank()) + " < p = " +
                                      std::to_string(p_));
        Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(
                                                    static_cast<Eigen::Index>(n),
                                                    static_cast<Eigen::Index>(p_));
        build_kernels(q);
    }

    std::size_t n() const { return n_; }
    const std::vector<std::size_t>& grid() const { return grid_; }

    /// Corrected, missingness-adjusted per-lag averages B**. `lags_needed`
    /// truncates the output (the fast WV only reads L_J entries); pass n for
    /// the full vector.
    CovarianceSummary corrected_averages(const CovarianceSummary& summary,
                                         const MissingnessModel& miss,
                                         std::size_t lags_needed) const {
        const std::size_t n = n_;
        if (summary.size() < n) throw InsufficientLags("summary shorter than n");
        const std::size_t out_n = std::min(lags_needed, n);
        const double mu = miss.mean();
        const std::vector<double> lam = lag_autocovariance(miss, out_n);

        CovarianceSummary out;
        out.mode = CovarianceSummary::Mode::NonStationary;
        out.seq.assign(out_n, 0.0);

        // Exact corrections at the grid lags, linear interpolation between.
        std::vector<double> corr_at(grid_.size(), 0.0);
        if (!identity_) {
            for (std::size_t g = 0; g < grid_.size(); ++g) {
                const std::size_t l = grid_[g];
                double s = 0.0;
                const auto& kap = kappa_[g];
                for (std::size_t j = 0; j < n; ++j) s += kap[j] * summary.seq[j];
                corr_at[g] = s - summary.seq[l] * static_cast<double>(n - l);
            }
        }
        std::size_t g = 0;
        for (std::size_t l = 0; l < out_n; ++l) {
            while (g + 1 < grid_.size() && grid_[g + 1] < l) ++g;
            double c = 0.0;
            if (!identity_) {
                if (l <= grid_[g]) {
                    c = corr_at[g];
                } else {
                    const double t = static_cast<double>(l - grid_[g]) /
                                     static_cast<double>(grid_[g + 1] - grid_[g]);
                    c = (1.0 - t) * corr_at[g] + t * corr_at[g + 1];
                }
            }
            const double s_star = summary.seq[l] * static_cast<double>(n - l) + c;
            const double b_star = s_star * (lam[l] + mu * mu);
            out.seq[l] = b_star / static_cast<double>(n - l);
        }
        return out;
    }

private:
    void build_kernels(const Eigen::MatrixXd& q) {
        const std::size_t n = n_;
        // Full lag sums rQ(d) = sum_i q_i . q_{i+d} via FFT per column.
        std::vector<double> rq(n, 0.0);
        for (std::size_t c = 0; c < p_; ++c) {
            std::vector<double> col(n);
            for (std::size_t i = 0; i < n; ++i) col[i] = q(static_cast<Eigen::Index>(i),
                                                           static_cast<Eigen::Index>(c));
            auto ac = fft::cross_correlation(col, col, n - 1);
            for (std::size_t d = 0; d < n; ++d) rq[d] += ac[d];
        }
        auto full_diag = [&](std::size_t d) { return (d == 0 ? static_cast<double>(n) : 0.0) - rq[d]; };
        auto qdot = [&](std::size_t i, std::size_t j) {
            return q.row(static_cast<Eigen::Index>(i)).dot(q.row(static_cast<Eigen::Index>(j)));
        };
        // Prefix(o, T) = [o==0] T - (rQ(o) - tail), tail = sum_{i=T}^{n-o-1} q_i . q_{i+o}
        auto prefix = [&](std::size_t o, std::size_t t_count) {
            double tail = 0.0;
            for (std::size_t i = t_count; i + o < n; ++i) tail += qdot(i, i + o);
            return (o == 0 ? static_cast<double>(t_count) : 0.0) - (rq[o] - tail);
        };

        kappa_.assign(grid_.size(), std::vector<double>(n, 0.0));
        for (std::size_t g = 0; g < grid_.size(); ++g) {
            const std::size_t l = grid_[g];
            auto& kap = kappa_[g];
            // family A: full diagonals beyond lag l
            for (std::size_t j = 1; l + j <= n - 1; ++j) kap[j] += full_diag(l + j);
            // family B: truncated diagonals at offsets l-j, count n-l
            for (std::size_t j = 0; j <= l; ++j) kap[j] += prefix(l - j, n - l);
            // family C: truncated sub-diagonal family, offset j-l, count n-j
            for (std::size_t j = l + 1; j <= n - 1; ++j) kap[j] += prefix(j - l, n - j);
        }
    }

    std::size_t n_ = 0;
    std::size_t p_ = 0;
    bool identity_ = false;
    std::vector<std::size_t> grid_;
    std::vector<std::vector<double>> kappa_;
};

/// One-call form of the Appendix pipeline: exact S_l on the lag grid,
/// interpolated correction, missingness Hadamard, per-lag rescale.
inline CovarianceSummary residual_corrected_summary(const CovarianceSummary& summary,
                                                    const Eigen::MatrixXd& x,
                                                    const MissingnessModel& miss) {
    const std::size_t n = summary.size();
    ResidualCorrection rc(x, n);
    return rc.corrected_averages(summary, miss, n);
}

} // namespace gmwmx

#endif

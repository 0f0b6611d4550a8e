#ifndef GMWMX_WV_COV_HPP
#define GMWMX_WV_COV_HPP

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "gmwmx/errors.hpp"
#include "gmwmx/linalg.hpp"
#include "gmwmx/noise_model.hpp"
#include "gmwmx/theo_wv.hpp"
#include "gmwmx/wavelet.hpp"

namespace gmwmx {

struct WvCovariance {
    enum class Method { TraceOracle, RecursiveStationary, RecursiveNonStationary };
    Eigen::MatrixXd v;
    Method method = Method::TraceOracle;
};

/// Exact Gaussian WV covariance v_{jl} = 2 tr[A_j Sigma A_l Sigma] by
/// explicit matrices. Oracle sizes only.
inline WvCovariance wv_cov_trace(const NoiseModel& model, std::size_t n, int scales,
                                 std::size_t cap = 2048) {
    if (n > cap) throw OracleSizeExceeded("wv_cov trace oracle capped at n = " + std::to_string(cap));
    if ((static_cast<std::size_t>(1) << scales) > n)
        throw ScaleBudgetExceeded("2^J exceeds series length");
    const Eigen::MatrixXd sigma = covariance_matrix(model, n);
    std::vector<Eigen::MatrixXd> prod(static_cast<std::size_t>(scales));
    for (int j = 1; j <= scales; ++j)
        prod[static_cast<std::size_t>(j - 1)] = filter_matrix_oracle(j, n) * sigma;
    WvCovariance out;
    out.method = WvCovariance::Method::TraceOracle;
    out.v.resize(scales, scales);
    for (int j = 0; j < scales; ++j)
        for (int l = j; l < scales; ++l) {
            const double v = 2.0 * prod[static_cast<std::size_t>(j)]
                                       .cwiseProduct(prod[static_cast<std::size_t>(l)].transpose())
                                       .sum();
            out.v(j, l) = v;
            out.v(l, j) = v;
        }
    return out;
}

namespace detail {

/// Runs the printed coefficient-autocovariance recursion with no rescaling.
/// `reach[j-1]` caps the highest lag kept at scale j.
inline std::vector<std::vector<double>> raw_coeff_autocov(const std::vector<double>& rho,
                                                          int scales,
                                                          const std::vector<std::size_t>& reach) {
    auto at = [](const std::vector<double>& v, long k) -> double {
        const std::size_t a = static_cast<std::size_t>(k < 0 ? -k : k);
        return a < v.size() ? v[a] : 0.0;
    };
    std::vector<std::vector<double>> f(static_cast<std::size_t>(scales));
    f[0].resize(reach[0] + 1);
    for (std::size_t h = 0; h < f[0].size(); ++h)
        f[0][h] = 0.5 * at(rho, static_cast<long>(h)) - 0.25 * at(rho, static_cast<long>(h) - 1) -
                  0.25 * at(rho, static_cast<long>(h) + 1);
    for (int j = 1; j < scales; ++j) {
        const auto& prev = f[static_cast<std::size_t>(j - 1)];
        const long s = 1L << (j - 1); // half filter length of scale j
        auto& cur = f[static_cast<std::size_t>(j)];
        cur.resize(reach[static_cast<std::size_t>(j)] + 1);
        for (std::size_t h = 0; h < cur.size(); ++h) {
            const long k = static_cast<long>(h);
            cur[h] = 1.5 * at(prev, k) + at(prev, k + s) + at(prev, k - s) +
                     0.25 * at(prev, k + 2 * s) + 0.25 * at(prev, k - 2 * s);
        }
    }
    return f;
}

/// Per-scale normalization constant anchored on the white-noise oracle value
/// 2^{-j}. The recursion is exact under this filter convention, so the
/// constant is 1 to machine precision; computing it guards the convention.
inline double scale_calibration(int j) {
    static std::map<int, double> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(j);
    if (it != cache.end()) return it->second;
    std::vector<double> wn((static_cast<std::size_t>(4) << j) + 4, 0.0);
    wn[0] = 1.0;
    std::vector<std::size_t> reach(static_cast<std::size_t>(j), 2 * wn.size());
    auto f = detail::raw_coeff_autocov(wn, j, reach);
    const double kappa = std::pow(2.0, -j) / f[static_cast<std::size_t>(j - 1)][0];
    cache.emplace(j, kappa);
    return kappa;
}

} // namespace detail

/// Haar coefficient autocovariances f_j(h), h = 0..min(max_lag, n - 2^j),
/// from the stationary base case
///   f_1(h) = rho(h)/2 - rho(h-1)/4 - rho(h+1)/4
/// and the scale recursion
///   f_{j+1}(k) = 3/2 f_j(k) + f_j(k +- 2^{j-1}) + 1/4 f_j(k +- 2^j),
/// rescaled by the white-noise oracle match per scale.
inline std::vector<std::vector<double>> coeff_autocov(const CovarianceSummary& summary, int scales,
                                                      std::size_t max_lag) {
    if (summary.seq.empty()) throw Error(Error::Kind::Usage, "empty summary");
    const std::size_t n = summary.size();
    std::vector<std::size_t> reach(static_cast<std::size_t>(scales));
    for (int j = 1; j <= scales; ++j) {
        const std::size_t lj = filter_length(j);
        const std::size_t domain = n > lj ? n - lj : 0; // M_j - 1
        reach[static_cast<std::size_t>(j - 1)] = std::min(max_lag, domain);
    }
    // Each scale's recursion consumes lags up to reach + 2^j from the scale
    // below; widen intermediate scales accordingly.
    for (int j = scales - 1; j >= 1; --j) {
        const std::size_t need = reach[static_cast<std::size_t>(j)] + (static_cast<std::size_t>(1) << j);
        reach[static_cast<std::size_t>(j - 1)] = std::max(reach[static_cast<std::size_t>(j - 1)], need);
    }
    auto f = detail::raw_coeff_autocov(summary.seq, scales, reach);
    for (int j = 1; j <= scales; ++j) {
        const double kappa = detail::scale_calibration(j);
        if (kappa != 1.0)
            for (auto& v : f[static_cast<std::size_t>(j - 1)]) v *= kappa;
    }
    return f;
}

namespace detail {

/// Triangular cross-scale kernel: W_{j+l,t} = sum_p kappa_p W_{j, t + p 2^{j-1}}.
inline std::vector<double> cross_scale_kernel(int level_gap) {
    const std::size_t two_l = static_cast<std::size_t>(1) << level_gap;
    std::vector<double> k(2 * two_l - 1);
    for (std::size_t p = 0; p < k.size(); ++p) {
        if (p <= two_l - 1)
            k[p] = static_cast<double>(p + 1) / static_cast<double>(two_l);
        else
            k[p] = static_cast<double>(2 * two_l - 1 - p) / static_cast<double>(two_l);
    }
    return k;
}

inline double overlap_count(long h, long mj, long mjl) {
    // #{(t,m): t in [1,mjl], m in [1,mj], t-m = h}
    const long lo = std::max(1L, 1L + h);
    const long hi = std::min(mjl, mj + h);
    return hi >= lo ? static_cast<double>(hi - lo + 1) : 0.0;
}

} // namespace detail

/// Appendix-style recursive V for stationary error processes. O(n J) work for
/// the diagonal plus the cross-scale aggregation.
inline WvCovariance wv_cov_recursive_stationary(const CovarianceSummary& summary, std::size_t n,
                                                int scales) {
    if (summary.size() < n) throw InsufficientLags("summary shorter than n");
    auto f = coeff_autocov(summary, scales, n);
    WvCovariance out;
    out.method = WvCovariance::Method::RecursiveStationary;
    out.v.setZero(scales, scales);
    for (int j = 1; j <= scales; ++j) {
        const long mj = static_cast<long>(coefficient_count(n, j));
        const auto& fj = f[static_cast<std::size_t>(j - 1)];
        double acc = static_cast<double>(mj) * fj[0] * fj[0];
        for (long h = 1; h < mj; ++h) {
            const double v = static_cast<std::size_t>(h) < fj.size() ? fj[static_cast<std::size_t>(h)] : 0.0;
            acc += 2.0 * static_cast<double>(mj - h) * v * v;
        }
        out.v(j - 1, j - 1) = 2.0 / (static_cast<double>(mj) * static_cast<double>(mj)) * acc;
    }
    for (int j = 1; j <= scales; ++j) {
        const auto& fj = f[static_cast<std::size_t>(j - 1)];
        auto fj_at = [&](long k) -> double {
            const std::size_t a = static_cast<std::size_t>(k < 0 ? -k : k);
            return a < fj.size() ? fj[a] : 0.0;
        };
        for (int jl = j + 1; jl <= scales; ++jl) {
            const int gap = jl - j;
            const auto kern = detail::cross_scale_kernel(gap);
            const long mj = static_cast<long>(coefficient_count(n, j));
            const long mjl = static_cast<long>(coefficient_count(n, jl));
            const long step = 1L << (j - 1);
            double acc = 0.0;
            for (long h = 1 - mj; h < mjl; ++h) {
                double g = 0.0;
                for (std::size_t p = 0; p < kern.size(); ++p)
                    g += kern[p] * fj_at(h + static_cast<long>(p) * step);
                acc += detail::overlap_count(h, mj, mjl) * g * g;
            }
            const double v = 2.0 / (static_cast<double>(mj) * static_cast<double>(mjl)) * acc;
            out.v(j - 1, jl - 1) = v;
            out.v(jl - 1, j - 1) = v;
        }
    }
    return out;
}

/// Four-step non-stationary V: exact coefficient-covariance propagation
/// below the quadratic-memory cap, per-lag-averaged fallback above it.
inline WvCovariance wv_cov_recursive_nonstationary(const NoiseModel& model, std::size_t n,
                                                   int scales, std::size_t cap = 1024) {
    if (n > cap) {
        // f~ fast approximation: feed the diagonal averages through the
        // stationary recursion.
        CovarianceSummary d = diagonal_averages(model, n);
        d.mode = CovarianceSummary::Mode::Stationary;
        WvCovariance out = wv_cov_recursive_stationary(d, n, scales);
        out.method = WvCovariance::Method::RecursiveNonStationary;
        return out;
    }
    const Eigen::MatrixXd sigma = covariance_matrix(model, n);
    std::vector<Eigen::MatrixXd> w(static_cast<std::size_t>(scales));
    {
        const std::size_t m1 = coefficient_count(n, 1);
        Eigen::MatrixXd w1(m1, m1);
        for (std::size_t k = 0; k < m1; ++k)
            for (std::size_t l = 0; l < m1; ++l)
                w1(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) =
                    0.25 * (sigma(k, l) - sigma(k, l + 1) - sigma(k + 1, l) + sigma(k + 1, l + 1));
        w[0] = std::move(w1);
    }
    for (int j = 2; j <= scales; ++j) {
        const std::size_t mj = coefficient_count(n, j);
        const std::size_t s = static_cast<std::size_t>(1) << (j - 2); // 2^{j-2}: step at scale j-1
        const auto& prev = w[static_cast<std::size_t>(j - 2)];
        Eigen::MatrixXd cur(mj, mj);
        const double c[3] = {0.5, 1.0, 0.5};
        for (std::size_t k = 0; k < mj; ++k)
            for (std::size_t l = 0; l < mj; ++l) {
                double acc = 0.0;
                for (int p = 0; p < 3; ++p)
                    for (int q = 0; q < 3; ++q)
                        acc += c[p] * c[q] *
                               prev(static_cast<Eigen::Index>(k + static_cast<std::size_t>(p) * s),
                                    static_cast<Eigen::Index>(l + static_cast<std::size_t>(q) * s));
                cur(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) = acc;
            }
        w[static_cast<std::size_t>(j - 1)] = std::move(cur);
    }
    WvCovariance out;
    out.method = WvCovariance::Method::RecursiveNonStationary;
    out.v.setZero(scales, scales);
    for (int j = 1; j <= scales; ++j) {
        const auto& wj = w[static_cast<std::size_t>(j - 1)];
        const double mj = static_cast<double>(wj.rows());
        out.v(j - 1, j - 1) = 2.0 / (mj * mj) * wj.array().square().sum();
    }
    for (int j = 1; j <= scales; ++j) {
        for (int jl = j + 1; jl <= scales; ++jl) {
            const auto kern = detail::cross_scale_kernel(jl - j);
            const std::size_t mj = coefficient_count(n, j);
            const std::size_t mjl = coefficient_count(n, jl);
            const std::size_t step = static_cast<std::size_t>(1) << (j - 1);
            const auto& wj = w[static_cast<std::size_t>(j - 1)];
            double acc = 0.0;
            for (std::size_t t = 0; t < mjl; ++t)
                for (std::size_t m = 0; m < mj; ++m) {
                    double cv = 0.0;
                    for (std::size_t p = 0; p < kern.size(); ++p)
                        cv += kern[p] * wj(static_cast<Eigen::Index>(t + p * step),
                                           static_cast<Eigen::Index>(m));
                    acc += cv * cv;
                }
            const double v = 2.0 / (static_cast<double>(mj) * static_cast<double>(mjl)) * acc;
            out.v(j - 1, jl - 1) = v;
            out.v(jl - 1, j - 1) = v;
        }
    }
    return out;
}

/// V-hat used by the estimator: routes on model stationarity.
inline WvCovariance wv_cov_estimate(const NoiseModel& model, std::size_t n, int scales,
                                    std::size_t nonstationary_cap = 1024) {
    if (model.stationary())
        return wv_cov_recursive_stationary(autocovariance(model, n), n, scales);
    return wv_cov_recursive_nonstationary(model, n, scales, nonstationary_cap);
}

} // namespace gmwmx

#endif

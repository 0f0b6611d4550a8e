#ifndef GMWMX_WAVELET_HPP
#define GMWMX_WAVELET_HPP

#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "gmwmx/errors.hpp"

namespace gmwmx {

/// Haar filter at scale j: 2^{j-1} taps of +1/2^j followed by 2^{j-1} taps of
/// -1/2^j. This normalization makes the WV of white noise sigma2/2^j.
struct HaarFilter {
    int scale = 1;
    std::vector<double> taps;

    std::size_t length() const { return taps.size(); }
};

inline HaarFilter haar_filter(int j) {
    if (j < 1) throw Error(Error::Kind::Usage, "scale must be >= 1");
    const std::size_t len = static_cast<std::size_t>(1) << j;
    HaarFilter f;
    f.scale = j;
    f.taps.assign(len, 0.0);
    const double v = 1.0 / static_cast<double>(len);
    for (std::size_t i = 0; i < len / 2; ++i) f.taps[i] = v;
    for (std::size_t i = len / 2; i < len; ++i) f.taps[i] = -v;
    return f;
}

inline std::size_t filter_length(int j) { return static_cast<std::size_t>(1) << j; }

inline std::size_t coefficient_count(std::size_t n, int j) {
    const std::size_t lj = filter_length(j);
    if (n < lj) throw SeriesTooShort("n < filter length at scale " + std::to_string(j));
    return n - lj + 1;
}

/// Default scale budget floor(log2 n) - 1, honoring J < log2(n).
inline int max_scales(std::size_t n) {
    int j = 0;
    while ((static_cast<std::size_t>(1) << (j + 1)) <= n) ++j;
    return j > 1 ? j - 1 : 1;
}

/// Full-overlap coefficients W_{j,i} = sum_l h_{j,l} x_{i+l}, i = 0..M_j-1,
/// computed from running sums (no boundary coefficients).
inline std::vector<double> wavelet_coefficients(const std::vector<double>& x, int j) {
    const std::size_t n = x.size();
    const std::size_t lj = filter_length(j);
    if (n < lj) throw SeriesTooShort("n < filter length at scale " + std::to_string(j));
    const std::size_t m = n - lj + 1;
    const std::size_t half = lj / 2;
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + x[i];
    std::vector<double> w(m);
    const double inv = 1.0 / static_cast<double>(lj);
    for (std::size_t i = 0; i < m; ++i) {
        const double first = prefix[i + half] - prefix[i];
        const double second = prefix[i + lj] - prefix[i + half];
        w[i] = (first - second) * inv;
    }
    return w;
}

/// Empirical wavelet variance and its scale metadata.
struct WvSpectrum {
    int scales = 0;                          // J
    std::vector<double> nu_hat;              // per-scale WV (mm^2)
    std::vector<std::size_t> m;              // coefficient counts M_j
    std::optional<Eigen::MatrixXd> cov;      // optional J x J covariance V

    std::size_t filter_len(int j) const { return filter_length(j); }
};

/// nu_hat_j = M_j^{-1} sum_i W_{j,i}^2 for j = 1..J. Missing observations
/// are expected to be exact zeros in x (residual convention).
inline WvSpectrum empirical_wv(const std::vector<double>& x, int scales) {
    const std::size_t n = x.size();
    if (scales < 1) throw Error(Error::Kind::Usage, "need at least one scale");
    if ((static_cast<std::size_t>(1) << scales) > n)
        throw ScaleBudgetExceeded("2^J exceeds series length");
    WvSpectrum s;
    s.scales = scales;
    s.nu_hat.resize(static_cast<std::size_t>(scales));
    s.m.resize(static_cast<std::size_t>(scales));
    for (int j = 1; j <= scales; ++j) {
        auto w = wavelet_coefficients(x, j);
        double acc = 0.0;
        for (double v : w) acc += v * v;
        s.nu_hat[static_cast<std::size_t>(j - 1)] = acc / static_cast<double>(w.size());
        s.m[static_cast<std::size_t>(j - 1)] = w.size();
    }
    return s;
}

} // namespace gmwmx

#endif

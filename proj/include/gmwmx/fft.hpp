#ifndef GMWMX_FFT_HPP
#define GMWMX_FFT_HPP

#include <cassert>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

namespace gmwmx {
namespace fft {

using cvec = std::vector<std::complex<double>>;

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

/// In-place iterative radix-2 FFT (inverse when sign = +1, unscaled).
inline void transform(cvec& a, int sign) {
    const std::size_t n = a.size();
    assert((n & (n - 1)) == 0 && "fft size must be a power of two");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * M_PI / static_cast<double>(len);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                std::complex<double> u = a[i + k];
                std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

inline void forward(cvec& a) { transform(a, -1); }

inline void inverse(cvec& a) {
    transform(a, +1);
    const double inv = 1.0 / static_cast<double>(a.size());
    for (auto& z : a) z *= inv;
}

/// Linear convolution of two real sequences, exact up to roundoff.
/// Result length is x.size() + y.size() - 1.
inline std::vector<double> convolve(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.empty() || y.empty()) return {};
    const std::size_t out_n = x.size() + y.size() - 1;
    const std::size_t m = next_pow2(out_n);
    cvec fx(m), fy(m);
    for (std::size_t i = 0; i < x.size(); ++i) fx[i] = x[i];
    for (std::size_t i = 0; i < y.size(); ++i) fy[i] = y[i];
    forward(fx);
    forward(fy);
    for (std::size_t i = 0; i < m; ++i) fx[i] *= fy[i];
    inverse(fx);
    std::vector<double> out(out_n);
    for (std::size_t i = 0; i < out_n; ++i) out[i] = fx[i].real();
    return out;
}

/// Lagged inner products c(k) = sum_i x[i] * y[i+k] for k = 0..maxlag.
inline std::vector<double> cross_correlation(const std::vector<double>& x,
                                             const std::vector<double>& y,
                                             std::size_t maxlag) {
    // correlate(x, y)(k) = conv(reverse(x), y)(k + len(x) - 1)
    std::vector<double> xr(x.rbegin(), x.rend());
    std::vector<double> full = convolve(xr, y);
    std::vector<double> out(maxlag + 1, 0.0);
    for (std::size_t k = 0; k <= maxlag; ++k) {
        const std::size_t idx = k + x.size() - 1;
        out[k] = idx < full.size() ? full[idx] : 0.0;
    }
    return out;
}

/// Multiplies the symmetric Toeplitz matrix T (first column t, t[k] read as
/// t[|i-j|]) into v via circulant embedding. O(n log n), no matrix storage.
inline std::vector<double> toeplitz_sym_matvec(const std::vector<double>& t,
                                               const std::vector<double>& v) {
    const std::size_t n = v.size();
    assert(t.size() >= n);
    const std::size_t m = next_pow2(2 * n);
    cvec c(m, 0.0), fv(m, 0.0);
    c[0] = t[0];
    for (std::size_t k = 1; k < n; ++k) {
        c[k] = t[k];
        c[m - k] = t[k];
    }
    for (std::size_t i = 0; i < n; ++i) fv[i] = v[i];
    forward(c);
    forward(fv);
    for (std::size_t i = 0; i < m; ++i) c[i] *= fv[i];
    inverse(c);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = c[i].real();
    return out;
}

} // namespace fft
} // namespace gmwmx

#endif

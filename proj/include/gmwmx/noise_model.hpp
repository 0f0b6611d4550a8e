#ifndef GMWMX_NOISE_MODEL_HPP
#define GMWMX_NOISE_MODEL_HPP

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "gmwmx/errors.hpp"
#include "gmwmx/fft.hpp"
#include "gmwmx/rng.hpp"

namespace gmwmx {

enum class NoiseKind { WhiteNoise, PowerLaw, Flicker, Matern };

/// One latent noise component. Parameter layout (all variances in mm^2):
///   WhiteNoise: {sigma2}
///   PowerLaw:   {sigma2, alpha}   (spectral index, alpha < 1 stationary)
///   Flicker:    {sigma2}          (power law pinned at alpha = 1)
///   Matern:     {sigma2, lambda, alpha}  (inverse range, smoothness > 1/2)
struct NoiseComponent {
    NoiseKind kind;
    std::vector<double> params;

    static NoiseComponent white_noise(double sigma2) { return {NoiseKind::WhiteNoise, {sigma2}}; }
    static NoiseComponent power_law(double sigma2, double alpha) { return {NoiseKind::PowerLaw, {sigma2, alpha}}; }
    static NoiseComponent flicker(double sigma2) { return {NoiseKind::Flicker, {sigma2}}; }
    static NoiseComponent matern(double sigma2, double lambda, double alpha) {
        return {NoiseKind::Matern, {sigma2, lambda, alpha}};
    }

    double sigma2() const { return params[0]; }

    bool stationary() const {
        switch (kind) {
            case NoiseKind::WhiteNoise: return true;
            case NoiseKind::PowerLaw: return params[1] < 1.0;
            case NoiseKind::Flicker: return false;
            case NoiseKind::Matern: return true;
        }
        return true;
    }

    std::size_t param_count() const { return params.size(); }

    std::string name() const {
        switch (kind) {
            case NoiseKind::WhiteNoise: return "wn";
            case NoiseKind::PowerLaw: return "pl";
            case NoiseKind::Flicker: return "fl";
            case NoiseKind::Matern: return "matern";
        }
        return "?";
    }

    /// Human-readable parameter names, used in reports ("wn.sigma2", ...).
    std::vector<std::string> param_names() const {
        switch (kind) {
            case NoiseKind::WhiteNoise: return {"sigma2"};
            case NoiseKind::PowerLaw: return {"sigma2", "alpha"};
            case NoiseKind::Flicker: return {"sigma2"};
            case NoiseKind::Matern: return {"sigma2", "lambda", "alpha"};
        }
        return {};
    }
};

/// Sum of independent latent components; the concatenated parameter vector is
/// gamma. At most one non-stationary component is allowed.
struct NoiseModel {
    std::vector<NoiseComponent> components;

    std::size_t param_count() const {
        std::size_t q = 0;
        for (const auto& c : components) q += c.param_count();
        return q;
    }

    bool stationary() const {
        for (const auto& c : components)
            if (!c.stationary()) return false;
        return true;
    }

    std::vector<double> gamma() const {
        std::vector<double> g;
        for (const auto& c : components) g.insert(g.end(), c.params.begin(), c.params.end());
        return g;
    }

    void set_gamma(const std::vector<double>& g) {
        std::size_t at = 0;
        for (auto& c : components)
            for (auto& p : c.params) p = g.at(at++);
    }

    std::vector<std::string> param_names() const {
        std::vector<std::string> out;
        for (const auto& c : components)
            for (const auto& pn : c.param_names()) out.push_back(c.name() + "." + pn);
        return out;
    }

    void validate() const {
        int nonstat = 0;
        for (const auto& c : components) {
            if (c.params.empty() || c.sigma2() <= 0.0)
                throw Error(Error::Kind::Usage, "noise variances must be strictly positive");
            if (c.kind == NoiseKind::Matern && c.params[2] <= 0.5)
                throw Error(Error::Kind::Usage, "matern smoothness must exceed 1/2");
            if (c.kind == NoiseKind::Matern && c.params[1] <= 0.0)
                throw Error(Error::Kind::Usage, "matern inverse range must be positive");
            if (!c.stationary()) ++nonstat;
        }
        if (nonstat > 1)
            throw Error(Error::Kind::Usage, "at most one non-stationary component per model");
    }

    std::string to_string() const {
        std::ostringstream os;
        for (std::size_t i = 0; i < components.size(); ++i) {
            if (i) os << "+";
            os << components[i].name() << "(";
            const auto& p = components[i].params;
            for (std::size_t k = 0; k < p.size(); ++k) {
                if (k) os << ",";
                os << p[k];
            }
            os << ")";
        }
        return os.str();
    }
};

/// Covariance information reduced to one vector: the autocovariance rho(k)
/// when every component is stationary, otherwise the per-lag averages d_k of
/// the diagonals of the covariance matrix.
struct CovarianceSummary {
    enum class Mode { Stationary, NonStationary };
    Mode mode = Mode::Stationary;
    std::vector<double> seq;

    std::size_t size() const { return seq.size(); }
};

/// Kasdin power-law filter coefficients h_0..h_{m-1}:
///   h_0 = 1,  h_i = (alpha/2 + i - 1) h_{i-1} / i.
inline std::vector<double> pl_coefficients(double alpha, std::size_t m) {
    std::vector<double> h(m);
    h[0] = 1.0;
    for (std::size_t i = 1; i < m; ++i)
        h[i] = (0.5 * alpha + static_cast<double>(i) - 1.0) * h[i - 1] / static_cast<double>(i);
    return h;
}

/// Stationary power-law autocovariance (Hosking):
///   rho(0) = sigma2 Gamma(1-alpha)/Gamma(1-alpha/2)^2,
///   rho(k) = (alpha/2 + k - 1)/(k - alpha/2) rho(k-1).
inline std::vector<double> pl_autocovariance(double sigma2, double alpha, std::size_t n) {
    std::vector<double> rho(n);
    rho[0] = sigma2 * std::exp(std::lgamma(1.0 - alpha) - 2.0 * std::lgamma(1.0 - 0.5 * alpha));
    for (std::size_t k = 1; k < n; ++k) {
        const double kk = static_cast<double>(k);
        rho[k] = (0.5 * alpha + kk - 1.0) / (kk - 0.5 * alpha) * rho[k - 1];
    }
    return rho;
}

/// Normalized Matern correlation m_nu(x) = 2^{1-nu}/Gamma(nu) x^nu K_nu(x),
/// with m_nu(0) = 1.
inline double matern_correlation(double nu, double x) {
    if (x <= 0.0) return 1.0;
    const double lg = (1.0 - nu) * std::log(2.0) - std::lgamma(nu) + nu * std::log(x);
    const double k = std::cyl_bessel_k(nu, x);
    if (k <= 0.0) return 0.0; // underflow at large x
    return std::exp(lg + std::log(k));
}

inline std::vector<double> matern_autocovariance(double sigma2, double lambda, double alpha,
                                                 std::size_t n) {
    const double nu = alpha - 0.5;
    std::vector<double> rho(n, 0.0);
    rho[0] = sigma2;
    for (std::size_t k = 1; k < n; ++k) {
        const double c = matern_correlation(nu, lambda * static_cast<double>(k));
        rho[k] = sigma2 * c;
        if (c < 1e-17) break; // monotone tail below double resolution
    }
    return rho;
}

/// Per-lag averages of the diagonals of sigma2 U^T U where U is the
/// upper-triangular convolution matrix of the power-law coefficients:
///   d_k = (n-k)^{-1} sum_{t=0}^{n-k-1} (n-k-t) h_t h_{t+k}.
/// Computed with two lagged correlations, O(n log n).
inline std::vector<double> pl_diagonal_averages(double sigma2, double alpha, std::size_t n) {
    std::vector<double> h = pl_coefficients(alpha, n);
    std::vector<double> th(n);
    for (std::size_t t = 0; t < n; ++t) th[t] = static_cast<double>(t) * h[t];
    std::vector<double> a = fft::cross_correlation(h, h, n - 1);
    std::vector<double> b = fft::cross_correlation(th, h, n - 1);
    std::vector<double> d(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double nk = static_cast<double>(n - k);
        d[k] = sigma2 * (nk * a[k] - b[k]) / nk;
    }
    return d;
}

/// Autocovariance of a fully stationary model (WN + PL(alpha<1) + Matern).
inline CovarianceSummary autocovariance(const NoiseModel& model, std::size_t n) {
    if (n < 2) throw Error(Error::Kind::Usage, "autocovariance requires n >= 2");
    model.validate();
    CovarianceSummary out;
    out.mode = CovarianceSummary::Mode::Stationary;
    out.seq.assign(n, 0.0);
    for (const auto& c : model.components) {
        if (!c.stationary())
            throw NonStationaryComponentPresent("autocovariance undefined for " + c.name());
        switch (c.kind) {
            case NoiseKind::WhiteNoise:
                out.seq[0] += c.sigma2();
                break;
            case NoiseKind::PowerLaw: {
                auto rho = pl_autocovariance(c.sigma2(), c.params[1], n);
                for (std::size_t k = 0; k < n; ++k) out.seq[k] += rho[k];
                break;
            }
            case NoiseKind::Matern: {
                auto rho = matern_autocovariance(c.sigma2(), c.params[1], c.params[2], n);
                for (std::size_t k = 0; k < n; ++k) out.seq[k] += rho[k];
                break;
            }
            case NoiseKind::Flicker:
                throw NonStationaryComponentPresent("autocovariance undefined for fl");
        }
    }
    return out;
}

/// Diagonal averages d_k of the model covariance matrix. For stationary
/// components the diagonals of a Toeplitz matrix average to rho(k); the
/// non-stationary power-law part uses the U^T U diagonal-average formula.
inline CovarianceSummary diagonal_averages(const NoiseModel& model, std::size_t n) {
    if (n < 2) throw Error(Error::Kind::Usage, "diagonal_averages requires n >= 2");
    model.validate();
    CovarianceSummary out;
    out.mode = CovarianceSummary::Mode::NonStationary;
    out.seq.assign(n, 0.0);
    for (const auto& c : model.components) {
        if (c.stationary()) {
            NoiseModel single{{c}};
            auto rho = autocovariance(single, n);
            for (std::size_t k = 0; k < n; ++k) out.seq[k] += rho.seq[k];
        } else {
            const double alpha = c.kind == NoiseKind::Flicker ? 1.0 : c.params[1];
            auto d = pl_diagonal_averages(c.sigma2(), alpha, n);
            for (std::size_t k = 0; k < n; ++k) out.seq[k] += d[k];
        }
    }
    return out;
}

namespace detail {

inline std::vector<double> simulate_pl_like(double sigma2, double alpha, std::size_t n, Rng& rng) {
    std::vector<double> w(n);
    const double sd = std::sqrt(sigma2);
    for (auto& x : w) x = rng.gaussian(sd);
    std::vector<double> h = pl_coefficients(alpha, n);
    std::vector<double> e(n, 0.0);
    if (n <= 2048) {
        for (std::size_t k = 0; k < n; ++k) {
            double acc = 0.0;
            for (std::size_t i = 0; i <= k; ++i) acc += h[i] * w[k - i];
            e[k] = acc;
        }
    } else {
        auto full = fft::convolve(h, w);
        for (std::size_t k = 0; k < n; ++k) e[k] = full[k];
    }
    return e;
}

/// Stationary Gaussian sample via circulant embedding of the autocovariance,
/// with a dense lower-triangular (Cholesky) fallback when the embedding is
/// not nonnegative.
inline std::vector<double> simulate_stationary(const std::vector<double>& rho, std::size_t n,
                                               Rng& rng) {
    const std::size_t m = fft::next_pow2(2 * n);
    fft::cvec c(m, 0.0);
    c[0] = rho[0];
    for (std::size_t k = 1; k < n; ++k) {
        c[k] = rho[k];
        c[m - k] = rho[k];
    }
    fft::forward(c);
    double min_eig = c[0].real(), max_eig = c[0].real();
    for (const auto& z : c) {
        min_eig = std::min(min_eig, z.real());
        max_eig = std::max(max_eig, z.real());
    }
    if (min_eig >= -1e-8 * max_eig) {
        fft::cvec z(m);
        const double scale = 1.0 / std::sqrt(static_cast<double>(m));
        for (std::size_t i = 0; i < m; ++i) {
            const double sd = std::sqrt(std::max(0.0, c[i].real())) * scale;
            z[i] = std::complex<double>(rng.gaussian(sd), rng.gaussian(sd));
        }
        fft::transform(z, -1);
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = z[i].real();
        return out;
    }

    if (n > 8192)
        throw FactorizationFailure("embedding not PSD and n too large for a dense factor");
    // dense Cholesky of the Toeplitz matrix, row-major lower triangle
    std::vector<double> l(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double acc = rho[i - j];
            for (std::size_t k = 0; k < j; ++k) acc -= l[i * n + k] * l[j * n + k];
            if (i == j) {
                if (acc <= 0.0)
                    throw FactorizationFailure("covariance matrix is numerically non-PSD");
                l[i * n + i] = std::sqrt(acc);
            } else {
                l[i * n + j] = acc / l[j * n + j];
            }
        }
    }
    std::vector<double> w(n), out(n, 0.0);
    for (auto& v : w) v = rng.gaussian();
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k <= i; ++k) acc += l[i * n + k] * w[k];
        out[i] = acc;
    }
    return out;
}

} // namespace detail

/// One sample path of the summed components; deterministic given the seed.
inline std::vector<double> simulate(const NoiseModel& model, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw Error(Error::Kind::Usage, "simulate requires n >= 1");
    model.validate();
    std::vector<double> out(n, 0.0);
    std::size_t comp_index = 0;
    for (const auto& c : model.components) {
        Rng rng(derive_seed(seed, comp_index++));
        std::vector<double> e;
        switch (c.kind) {
            case NoiseKind::WhiteNoise: {
                e.resize(n);
                const double sd = std::sqrt(c.sigma2());
                for (auto& x : e) x = rng.gaussian(sd);
                break;
            }
            case NoiseKind::PowerLaw:
                e = detail::simulate_pl_like(c.sigma2(), c.params[1], n, rng);
                break;
            case NoiseKind::Flicker:
                e = detail::simulate_pl_like(c.sigma2(), 1.0, n, rng);
                break;
            case NoiseKind::Matern: {
                auto rho = matern_autocovariance(c.sigma2(), c.params[1], c.params[2], n);
                e = detail::simulate_stationary(rho, n, rng);
                break;
            }
        }
        for (std::size_t i = 0; i < n; ++i) out[i] += e[i];
    }
    return out;
}

/// Parses model strings like "wn+pl", "wn(10)+pl(6,0.9)", "fl(1)",
/// "matern(8,0.05,1.1)". Missing parameters get placeholder initial values
/// that the estimator replaces with data-driven starts.
inline NoiseModel parse_noise_model(const std::string& text) {
    NoiseModel model;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t plus = text.find('+', pos);
        std::string tok = text.substr(pos, plus == std::string::npos ? std::string::npos : plus - pos);
        pos = plus == std::string::npos ? text.size() : plus + 1;

        std::string name = tok;
        std::vector<double> args;
        std::size_t paren = tok.find('(');
        if (paren != std::string::npos) {
            if (tok.back() != ')') throw ParseError("unbalanced parentheses in noise model: " + tok);
            name = tok.substr(0, paren);
            std::string inner = tok.substr(paren + 1, tok.size() - paren - 2);
            std::istringstream is(inner);
            std::string field;
            while (std::getline(is, field, ',')) {
                try {
                    args.push_back(std::stod(field));
                } catch (const std::exception&) {
                    throw ParseError("bad numeric argument in noise model: " + field);
                }
            }
        }
        auto arg = [&](std::size_t i, double fallback) { return i < args.size() ? args[i] : fallback; };
        if (name == "wn") {
            if (args.size() > 1) throw ParseError("wn takes at most 1 parameter");
            model.components.push_back(NoiseComponent::white_noise(arg(0, 1.0)));
        } else if (name == "pl") {
            if (args.size() > 2) throw ParseError("pl takes at most 2 parameters");
            model.components.push_back(NoiseComponent::power_law(arg(0, 1.0), arg(1, 0.5)));
        } else if (name == "fl") {
            if (args.size() > 1) throw ParseError("fl takes at most 1 parameter");
            model.components.push_back(NoiseComponent::flicker(arg(0, 1.0)));
        } else if (name == "matern") {
            if (args.size() > 3) throw ParseError("matern takes at most 3 parameters");
            model.components.push_back(NoiseComponent::matern(arg(0, 1.0), arg(1, 0.1), arg(2, 1.0)));
        } else {
            throw ParseError("unknown noise component: '" + name + "'");
        }
    }
    if (model.components.empty()) throw ParseError("empty noise model string");
    model.validate();
    return model;
}

} // namespace gmwmx

#endif

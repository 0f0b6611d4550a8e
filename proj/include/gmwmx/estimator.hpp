#ifndef GMWMX_ESTIMATOR_HPP
#define GMWMX_ESTIMATOR_HPP

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gmwmx/design.hpp"
#include "gmwmx/errors.hpp"
#include "gmwmx/fbm.hpp"
#include "gmwmx/fft.hpp"
#include "gmwmx/missingness.hpp"
#include "gmwmx/noise_model.hpp"
#include "gmwmx/optim.hpp"
#include "gmwmx/theo_wv.hpp"
#include "gmwmx/wavelet.hpp"
#include "gmwmx/wv_cov.hpp"

namespace gmwmx {

struct GmwmxConfig {
    enum class Correction { None, ResidualCorrected };
    enum class CiMethod { Gaussian, LongMemoryAuto };

    int scales = 0; // 0 = floor(log2 n) - 1
    Correction correction = Correction::ResidualCorrected;
    double ci_level = 0.95;
    int starts = 5;
    std::size_t iter_budget_per_param = 500;
    double tol = 1e-12;
    std::uint64_t seed = 0;
    std::size_t wv_cov_nonstat_cap = 1024;
    CiMethod ci_method = CiMethod::Gaussian;
    std::size_t lm_reps = 2000;
    std::size_t lm_grid_cap = 512;
};

struct StageTimings {
    double least_squares = 0.0;
    double missingness = 0.0;
    double empirical_wv = 0.0;
    double precompute = 0.0;
    double pilot_fit = 0.0;
    double weighted_fit = 0.0;
    double wv_covariance = 0.0;
    double final_fit = 0.0;
    double phi = 0.0;
    double total = 0.0;
};

struct FitResult {
    Eigen::VectorXd beta_hat;
    Eigen::MatrixXd phi_hat;
    std::vector<std::string> beta_names;
    NoiseModel noise;
    MissingnessModel missingness;
    int scales = 0;
    std::vector<double> wv_empirical;
    std::vector<double> wv_fitted;
    std::vector<std::size_t> wv_m;
    double objective = 0.0;
    double ci_level = 0.95;
    std::vector<double> ci_low;
    std::vector<double> ci_high;
    StageTimings timings;
    bool converged = true;
    std::size_t n = 0;
    std::size_t n_observed = 0;
};

/// Adjusted theoretical WV engine: model -> per-lag summary -> (residual
/// correction | missingness Hadamard) -> fast WV. Owns the flicker
/// diagonal-average basis cache (alpha is pinned at 1, so the basis only
/// depends on n and rescales with sigma2).
class TheoreticalWvEngine {
public:
    TheoreticalWvEngine(std::size_t n, int scales, MissingnessModel miss,
                        const ResidualCorrection* rc)
        : n_(n), scales_(scales), miss_(miss), rc_(rc) {}

    CovarianceSummary summarize(const NoiseModel& model) const {
        if (model.stationary()) return autocovariance(model, n_);
        CovarianceSummary out;
        out.mode = CovarianceSummary::Mode::NonStationary;
        out.seq.assign(n_, 0.0);
        for (const auto& c : model.components) {
            if (c.stationary()) {
                NoiseModel single{{c}};
                const auto rho = autocovariance(single, n_);
                for (std::size_t k = 0; k < n_; ++k) out.seq[k] += rho.seq[k];
            } else if (c.kind == NoiseKind::Flicker) {
                if (flicker_basis_.empty()) flicker_basis_ = pl_diagonal_averages(1.0, 1.0, n_);
                for (std::size_t k = 0; k < n_; ++k) out.seq[k] += c.sigma2() * flicker_basis_[k];
            } else {
                const auto d = pl_diagonal_averages(c.sigma2(), c.params[1], n_);
                for (std::size_t k = 0; k < n_; ++k) out.seq[k] += d[k];
            }
        }
        return out;
    }

    std::vector<double> operator()(const NoiseModel& model) const {
        CovarianceSummary s = summarize(model);
        if (rc_) {
            auto adj = rc_->corrected_averages(s, miss_, filter_length(scales_));
            return theoretical_wv_fast(adj, n_, scales_);
        }
        return missingness_adjusted_wv(s, miss_, n_, scales_);
    }

private:
    std::size_t n_;
    int scales_;
    MissingnessModel miss_;
    const ResidualCorrection* rc_;
    mutable std::vector<double> flicker_basis_;
};

struct GmwmFit {
    NoiseModel model;
    double objective = 0.0;
    bool converged = false;
    std::size_t iterations = 0;
};

/// GMWM under missingness: minimize [nu_hat - nu(gamma, theta_hat)]' Omega [...]
/// by multi-start Nelder-Mead over transformed parameters.
inline GmwmFit gmwm_fit(const WvSpectrum& nu_hat, const NoiseModel& model_template,
                        const MissingnessModel& miss, const Eigen::MatrixXd& omega,
                        const ResidualCorrection* residual_ctx, int starts = 5,
                        std::size_t iter_budget_per_param = 500, double tol = 1e-12,
                        std::uint64_t seed = 0) {
    const int scales = nu_hat.scales;
    const std::size_t q = model_template.param_count();
    if (q > static_cast<std::size_t>(scales))
        throw Unidentifiable("q = " + std::to_string(q) + " parameters with J = " +
                             std::to_string(scales) + " scales");
    const std::size_t n = nu_hat.m[0] + 1; // M_1 = n - 1
    TheoreticalWvEngine engine(n, scales, miss, residual_ctx);

    Eigen::VectorXd target(scales);
    for (int j = 0; j < scales; ++j) target(j) = nu_hat.nu_hat[static_cast<std::size_t>(j)];

    auto objective = [&](const Eigen::VectorXd& theta) -> double {
        for (Eigen::Index i = 0; i < theta.size(); ++i)
            if (!std::isfinite(theta(i)) || std::abs(theta(i)) > 120.0)
                return std::numeric_limits<double>::infinity();
        const NoiseModel m = from_unconstrained(model_template, theta);
        const auto nu = engine(m);
        Eigen::VectorXd r(scales);
        for (int j = 0; j < scales; ++j) r(j) = target(j) - nu[static_cast<std::size_t>(j)];
        const double v = r.dot(omega * r);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    // Start 0: the template. Start 1: data-driven variances from nu_hat_1.
    // Remaining starts: seeded perturbations of start 0.
    std::vector<Eigen::VectorXd> start_pts;
    start_pts.push_back(to_unconstrained(model_template));
    {
        NoiseModel m = model_template;
        const double base = std::max(2.0 * nu_hat.nu_hat[0], 1e-12) /
                            static_cast<double>(m.components.size());
        for (auto& c : m.components) c.params[0] = base;
        start_pts.push_back(to_unconstrained(m));
    }
    Rng rng(derive_seed(seed, 0x9d2c5680ULL));
    while (start_pts.size() < static_cast<std::size_t>(std::max(starts, 1))) {
        Eigen::VectorXd pert = start_pts[0];
        for (Eigen::Index i = 0; i < pert.size(); ++i) pert(i) += rng.gaussian(0.75);
        start_pts.push_back(pert);
    }
    start_pts.resize(static_cast<std::size_t>(std::max(starts, 1)));

    const std::size_t budget = iter_budget_per_param * q;
    GmwmFit best;
    best.objective = std::numeric_limits<double>::infinity();
    for (const auto& s0 : start_pts) {
        SimplexResult r = nelder_mead(objective, s0, budget, tol);
        best.iterations += r.iterations;
        if (r.value < best.objective) {
            best.objective = r.value;
            best.model = from_unconstrained(model_template, r.x);
        }
        best.converged = best.converged || r.converged;
    }
    return best;
}

/// Asymptotic covariance of beta_hat under missingness:
///   Phi = mu^{-2} (X'X)^{-1} X' { (Lambda + mu^2 11') o Sigma } X (X'X)^{-1},
/// streamed lag by lag through design column cross-correlations so no n x n
/// matrix is formed. Sigma enters as rho(k) (stationary) or d_k averages.
inline Eigen::MatrixXd phi_hat(const Eigen::MatrixXd& x, const NoiseModel& model,
                               const MissingnessModel& miss) {
    const std::size_t n = static_cast<std::size_t>(x.rows());
    const Eigen::Index p = x.cols();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < p) throw RankDeficientDesign("phi_hat needs full column rank");

    CovarianceSummary s = model.stationary() ? autocovariance(model, n)
                                             : diagonal_averages(model, n);
    const double mu = miss.mean();
    const std::vector<double> lam = lag_autocovariance(miss, n);
    std::vector<double> t(n);
    for (std::size_t k = 0; k < n; ++k) t[k] = s.seq[k] * (lam[k] + mu * mu);

    std::vector<std::vector<double>> cols(static_cast<std::size_t>(p));
    for (Eigen::Index c = 0; c < p; ++c) {
        cols[static_cast<std::size_t>(c)].resize(n);
        for (std::size_t i = 0; i < n; ++i)
            cols[static_cast<std::size_t>(c)][i] = x(static_cast<Eigen::Index>(i), c);
    }
    Eigen::MatrixXd g(p, p);
    for (Eigen::Index a = 0; a < p; ++a)
        for (Eigen::Index b = a; b < p; ++b) {
            const auto cab = fft::cross_correlation(cols[static_cast<std::size_t>(a)],
                                                    cols[static_cast<std::size_t>(b)], n - 1);
            const auto cba = fft::cross_correlation(cols[static_cast<std::size_t>(b)],
                                                    cols[static_cast<std::size_t>(a)], n - 1);
            double acc = t[0] * cab[0];
            for (std::size_t k = 1; k < n; ++k) acc += t[k] * (cab[k] + cba[k]);
            g(a, b) = acc;
            g(b, a) = acc;
        }
    const Eigen::MatrixXd xtx_inv = (x.transpose() * x).inverse();
    return (xtx_inv * g * xtx_inv) / (mu * mu);
}

namespace detail {

inline double seconds_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Thinned design for the long-memory quantile simulation: keeps the shape of
/// the normalized regressor functions while bounding the fBM factorization.
inline Eigen::MatrixXd thin_design(const std::vector<double>& epochs, const TrajectoryModel& traj,
                                   std::size_t cap) {
    if (epochs.size() <= cap) return build_design(epochs, traj);
    std::vector<double> sub;
    sub.reserve(cap);
    const double step = static_cast<double>(epochs.size() - 1) / static_cast<double>(cap - 1);
    for (std::size_t i = 0; i < cap; ++i)
        sub.push_back(epochs[static_cast<std::size_t>(std::llround(step * static_cast<double>(i)))]);
    sub.erase(std::unique(sub.begin(), sub.end()), sub.end());
    return build_design(sub, traj);
}

} // namespace detail

/// One-Step GMWMX: masked LS, residual WV, missingness estimation, pilot and
/// weighted GMWM fits, Omega* = V_hat^{-1} refit, and the Phi_hat covariance.
inline FitResult one_step_gmwmx(const std::vector<double>& epochs,
                                const std::vector<double>& values_with_zeros,
                                const std::vector<std::uint8_t>& mask,
                                const TrajectoryModel& traj, const NoiseModel& model_template,
                                const GmwmxConfig& config = {}) {
    const auto t_total = std::chrono::steady_clock::now();
    const std::size_t n = epochs.size();
    FitResult out;
    out.n = n;
    out.ci_level = config.ci_level;

    auto t0 = std::chrono::steady_clock::now();
    const Eigen::MatrixXd x = build_design(epochs, traj);
    const LeastSquaresFit ls = least_squares_missing(x, values_with_zeros, mask);
    out.timings.least_squares = detail::seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    out.missingness = estimate_missingness(mask);
    out.timings.missingness = detail::seconds_since(t0);
    out.n_observed = 0;
    for (auto z : mask) out.n_observed += z;

    const int scales = config.scales > 0 ? config.scales : max_scales(n);
    out.scales = scales;

    t0 = std::chrono::steady_clock::now();
    const WvSpectrum nu = empirical_wv(ls.residuals, scales);
    out.wv_empirical = nu.nu_hat;
    out.wv_m = nu.m;
    out.timings.empirical_wv = detail::seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    std::unique_ptr<ResidualCorrection> rc;
    if (config.correction == GmwmxConfig::Correction::ResidualCorrected)
        rc = std::make_unique<ResidualCorrection>(x, n);
    out.timings.precompute = detail::seconds_since(t0);

    const int j_dim = scales;
    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(j_dim, j_dim);

    t0 = std::chrono::steady_clock::now();
    GmwmFit pilot = gmwm_fit(nu, model_template, out.missingness, identity, rc.get(),
                             config.starts, config.iter_budget_per_param, config.tol, config.seed);
    out.timings.pilot_fit = detail::seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    Eigen::MatrixXd omega_diag = Eigen::MatrixXd::Zero(j_dim, j_dim);
    {
        WvCovariance vp = wv_cov_estimate(pilot.model, n, scales, config.wv_cov_nonstat_cap);
        for (int j = 0; j < j_dim; ++j) {
            const double v = vp.v(j, j);
            omega_diag(j, j) = v > 1e-300 ? 1.0 / v : 1.0;
        }
    }
    GmwmFit step5 = gmwm_fit(nu, pilot.model, out.missingness, omega_diag, rc.get(),
                             config.starts, config.iter_budget_per_param, config.tol,
                             derive_seed(config.seed, 5));
    out.timings.weighted_fit = detail::seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    WvCovariance vhat = wv_cov_estimate(step5.model, n, scales, config.wv_cov_nonstat_cap);
    Eigen::MatrixXd omega_star;
    {
        // ridge-regularized inverse, eigenvalues clipped so Omega* stays PSD
        // even when V-hat comes from the approximate non-stationary path
        Eigen::MatrixXd vr = 0.5 * (vhat.v + vhat.v.transpose());
        const double ridge = 1e-10 * vr.trace() / static_cast<double>(j_dim);
        vr.diagonal().array() += ridge;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(vr);
        Eigen::VectorXd inv_eigs = es.eigenvalues();
        for (int j = 0; j < j_dim; ++j) inv_eigs(j) = 1.0 / std::max(inv_eigs(j), ridge);
        omega_star = es.eigenvectors() * inv_eigs.asDiagonal() * es.eigenvectors().transpose();
    }
    out.timings.wv_covariance = detail::seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    GmwmFit final_fit = gmwm_fit(nu, step5.model, out.missingness, omega_star, rc.get(),
                                 config.starts, config.iter_budget_per_param, config.tol,
                                 derive_seed(config.seed, 7));
    out.timings.final_fit = detail::seconds_since(t0);
    out.noise = final_fit.model;
    out.objective = final_fit.objective;
    out.converged = pilot.converged && step5.converged && final_fit.converged;

    {
        TheoreticalWvEngine engine(n, scales, out.missingness, rc.get());
        out.wv_fitted = engine(out.noise);
    }

    t0 = std::chrono::steady_clock::now();
    out.beta_hat = ls.beta;
    out.beta_names = traj.param_names();
    out.phi_hat = phi_hat(x, out.noise, out.missingness);
    out.timings.phi = detail::seconds_since(t0);

    // Confidence intervals. Gaussian by default; the long-memory switch uses
    // Monte Carlo quantiles of the limit statistic, shape-normalized and
    // applied to the Phi_hat standard errors.
    const Eigen::Index p = out.beta_hat.size();
    out.ci_low.resize(static_cast<std::size_t>(p));
    out.ci_high.resize(static_cast<std::size_t>(p));
    double d_long = 0.0;
    if (config.ci_method == GmwmxConfig::CiMethod::LongMemoryAuto) {
        for (const auto& c : out.noise.components)
            if (c.kind == NoiseKind::PowerLaw && c.params[1] > 0.0 && c.params[1] < 1.0)
                d_long = std::max(d_long, 0.5 * c.params[1]);
    }
    if (d_long > 0.0 && d_long < 0.5) {
        const Eigen::MatrixXd xs = detail::thin_design(epochs, traj, config.lm_grid_cap);
        const QuantileTable table = long_memory_quantiles(xs, d_long, config.lm_reps,
                                                          derive_seed(config.seed, 99));
        const double a = 1.0 - config.ci_level;
        std::size_t qlo = 0, qhi = table.probs.size() - 1;
        for (std::size_t i = 0; i < table.probs.size(); ++i) {
            if (std::abs(table.probs[i] - a / 2.0) < std::abs(table.probs[qlo] - a / 2.0)) qlo = i;
            if (std::abs(table.probs[i] - (1.0 - a / 2.0)) < std::abs(table.probs[qhi] - (1.0 - a / 2.0)))
                qhi = i;
        }
        for (Eigen::Index i = 0; i < p; ++i) {
            const double se = std::sqrt(std::max(0.0, out.phi_hat(i, i)));
            const double sd = table.mc_sd(i) > 0.0 ? table.mc_sd(i) : 1.0;
            out.ci_low[static_cast<std::size_t>(i)] =
                out.beta_hat(i) + table.quantiles(i, static_cast<Eigen::Index>(qlo)) / sd * se;
            out.ci_high[static_cast<std::size_t>(i)] =
                out.beta_hat(i) + table.quantiles(i, static_cast<Eigen::Index>(qhi)) / sd * se;
        }
    } else {
        const double zq = normal_quantile(1.0 - (1.0 - config.ci_level) / 2.0);
        for (Eigen::Index i = 0; i < p; ++i) {
            const double se = std::sqrt(std::max(0.0, out.phi_hat(i, i)));
            out.ci_low[static_cast<std::size_t>(i)] = out.beta_hat(i) - zq * se;
            out.ci_high[static_cast<std::size_t>(i)] = out.beta_hat(i) + zq * se;
        }
    }

    out.timings.total = detail::seconds_since(t_total);
    return out;
}

} // namespace gmwmx

#endif

#ifndef GMWMX_LINALG_HPP
#define GMWMX_LINALG_HPP

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <vector>

#include "gmwmx/errors.hpp"
#include "gmwmx/fft.hpp"
#include "gmwmx/noise_model.hpp"
#include "gmwmx/rng.hpp"

namespace gmwmx {

inline Eigen::MatrixXd toeplitz_from(const std::vector<double>& rho, std::size_t n) {
    Eigen::MatrixXd s(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) s(i, j) = rho[i > j ? i - j : j - i];
    return s;
}

/// Covariance matrix sigma2 U^T U of a truncated power-law convolution,
/// entries cov(e_s, e_t) = sigma2 sum_{i<=min(s,t)} h_i h_{i+|t-s|}.
inline Eigen::MatrixXd pl_covariance_matrix(double sigma2, double alpha, std::size_t n) {
    std::vector<double> h = pl_coefficients(alpha, n);
    Eigen::MatrixXd s(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        double acc = 0.0;
        for (std::size_t t = 0; t + k < n; ++t) {
            acc += h[t] * h[t + k];
            s(t, t + k) = sigma2 * acc;
            s(t + k, t) = sigma2 * acc;
        }
    }
    return s;
}

/// Dense covariance matrix of a noise model (oracle-sized n only).
inline Eigen::MatrixXd covariance_matrix(const NoiseModel& model, std::size_t n) {
    model.validate();
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
    for (const auto& c : model.components) {
        if (c.stationary()) {
            NoiseModel single{{c}};
            s += toeplitz_from(autocovariance(single, n).seq, n);
        } else {
            const double alpha = c.kind == NoiseKind::Flicker ? 1.0 : c.params[1];
            s += pl_covariance_matrix(c.sigma2(), alpha, n);
        }
    }
    return s;
}

} // namespace gmwmx

#endif

#ifndef GMWMX_DESIGN_HPP
#define GMWMX_DESIGN_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "gmwmx/errors.hpp"

namespace gmwmx {

/// Functional (trajectory) model: intercept, optional linear rate, seasonal
/// pairs, and one Heaviside column per offset epoch. Fixed column order:
/// [1, t - t0, cos(2 pi f1 (t-t0)), sin(...), ..., step(t >= offset_k)...].
struct TrajectoryModel {
    double t0 = 0.0;
    bool include_trend = true;
    std::vector<double> seasonal_frequencies; // cycles per epoch unit
    std::vector<double> offset_epochs;

    static constexpr double annual = 1.0 / 365.25;
    static constexpr double semiannual = 2.0 / 365.25;

    std::size_t param_count() const {
        return 1 + (include_trend ? 1 : 0) + 2 * seasonal_frequencies.size() + offset_epochs.size();
    }

    std::vector<std::string> param_names() const {
        std::vector<std::string> names{"intercept"};
        if (include_trend) names.push_back("trend");
        for (std::size_t h = 0; h < seasonal_frequencies.size(); ++h) {
            names.push_back("cos" + std::to_string(h + 1));
            names.push_back("sin" + std::to_string(h + 1));
        }
        for (std::size_t k = 0; k < offset_epochs.size(); ++k)
            names.push_back("offset" + std::to_string(k + 1));
        return names;
    }
};

inline Eigen::MatrixXd build_design(const std::vector<double>& epochs,
                                    const TrajectoryModel& model) {
    for (std::size_t i = 1; i < epochs.size(); ++i)
        if (epochs[i] <= epochs[i - 1])
            throw NonMonotoneEpochs("epochs must be strictly increasing");
    const std::size_t n = epochs.size();
    const std::size_t p = model.param_count();
    Eigen::MatrixXd x(n, p);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = epochs[i] - model.t0;
        std::size_t c = 0;
        x(i, c++) = 1.0;
        if (model.include_trend) x(i, c++) = t;
        for (double f : model.seasonal_frequencies) {
            const double w = 2.0 * M_PI * f * t;
            x(i, c++) = std::cos(w);
            x(i, c++) = std::sin(w);
        }
        for (double e : model.offset_epochs) x(i, c++) = epochs[i] >= e ? 1.0 : 0.0;
    }
    return x;
}

struct LeastSquaresFit {
    Eigen::VectorXd beta;
    std::vector<double> residuals; // exact zeros where masked
    double condition = 0.0;
};

/// Masked least squares: beta = (X~^T X~)^{-1} X~^T y~ with X~ the design
/// with zeroed rows at missing positions, solved by SVD with a condition
/// check.
inline LeastSquaresFit least_squares_missing(const Eigen::MatrixXd& x,
                                             const std::vector<double>& y_tilde,
                                             const std::vector<std::uint8_t>& z) {
    const std::size_t n = static_cast<std::size_t>(x.rows());
    if (y_tilde.size() != n || z.size() != n)
        throw Error(Error::Kind::Usage, "design/response/mask size mismatch");
    Eigen::MatrixXd xt = x;
    Eigen::VectorXd yt(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (z[i]) {
            yt(static_cast<Eigen::Index>(i)) = y_tilde[i];
        } else {
            xt.row(static_cast<Eigen::Index>(i)).setZero();
            yt(static_cast<Eigen::Index>(i)) = 0.0;
        }
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(xt, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    if (!(smin > 0.0) || smin < smax * 1e-12)
        throw SingularMaskedDesign("masked design condition number " +
                                   std::to_string(smin > 0.0 ? smax / smin : INFINITY));
    LeastSquaresFit fit;
    fit.condition = smax / smin;
    fit.beta = svd.solve(yt);
    fit.residuals.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        if (z[i])
            fit.residuals[i] = y_tilde[i] - x.row(static_cast<Eigen::Index>(i)).dot(fit.beta);
    return fit;
}

} // namespace gmwmx

#endif

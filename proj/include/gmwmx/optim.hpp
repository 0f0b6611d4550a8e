#ifndef GMWMX_OPTIM_HPP
#define GMWMX_OPTIM_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "gmwmx/noise_model.hpp"

namespace gmwmx {

struct SimplexResult {
    Eigen::VectorXd x;
    double value = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Classic Nelder-Mead over an unconstrained vector. Stops when the relative
/// objective improvement across the simplex falls below `tol` or the
/// iteration budget runs out.
inline SimplexResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& fn,
                                 const Eigen::VectorXd& x0, std::size_t max_iter,
                                 double tol = 1e-12, double step = 0.25) {
    const Eigen::Index d = x0.size();
    std::vector<Eigen::VectorXd> pts(static_cast<std::size_t>(d) + 1, x0);
    for (Eigen::Index i = 0; i < d; ++i) pts[static_cast<std::size_t>(i) + 1](i) += step;
    std::vector<double> vals(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) vals[i] = fn(pts[i]);

    SimplexResult res;
    std::vector<std::size_t> order(pts.size());
    for (std::size_t it = 0; it < max_iter; ++it) {
        res.iterations = it + 1;
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        const std::size_t best = order.front(), worst = order.back(), second = order[order.size() - 2];
        const double spread = std::abs(vals[worst] - vals[best]);
        if (spread <= tol * (std::abs(vals[best]) + 1e-300)) {
            res.converged = true;
            break;
        }
        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
        for (std::size_t i = 0; i < pts.size(); ++i)
            if (i != worst) centroid += pts[i];
        centroid /= static_cast<double>(pts.size() - 1);

        Eigen::VectorXd refl = centroid + (centroid - pts[worst]);
        double frefl = fn(refl);
        if (frefl < vals[best]) {
            Eigen::VectorXd expd = centroid + 2.0 * (centroid - pts[worst]);
            double fexpd = fn(expd);
            if (fexpd < frefl) {
                pts[worst] = expd;
                vals[worst] = fexpd;
            } else {
                pts[worst] = refl;
                vals[worst] = frefl;
            }
        } else if (frefl < vals[second]) {
            pts[worst] = refl;
            vals[worst] = frefl;
        } else {
            Eigen::VectorXd contr = centroid + 0.5 * ((frefl < vals[worst] ? refl : pts[worst]) - centroid);
            double fcontr = fn(contr);
            if (fcontr < std::min(frefl, vals[worst])) {
                pts[worst] = contr;
                vals[worst] = fcontr;
            } else {
                for (std::size_t i = 0; i < pts.size(); ++i) {
                    if (i == best) continue;
                    pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
                    vals[i] = fn(pts[i]);
                }
            }
        }
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < vals.size(); ++i)
        if (vals[i] < vals[best]) best = i;
    res.x = pts[best];
    res.value = vals[best];
    return res;
}

// ---------------------------------------------------------------------------
// Noise-parameter transforms: variances on log scale, bounded parameters
// mapped to the real line so the simplex search is unconstrained.
// ---------------------------------------------------------------------------

inline Eigen::VectorXd to_unconstrained(const NoiseModel& model) {
    std::vector<double> out;
    for (const auto& c : model.components) {
        out.push_back(std::log(c.params[0]));
        switch (c.kind) {
            case NoiseKind::PowerLaw: {
                const double a = std::min(std::max(c.params[1], 1e-9), 1.0 - 1e-9);
                out.push_back(std::log(a / (1.0 - a)));
                break;
            }
            case NoiseKind::Matern:
                out.push_back(std::log(c.params[1]));
                out.push_back(std::log(c.params[2] - 0.5));
                break;
            default:
                break;
        }
    }
    return Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(out.size()));
}

inline NoiseModel from_unconstrained(const NoiseModel& tmpl, const Eigen::VectorXd& theta) {
    NoiseModel m = tmpl;
    Eigen::Index at = 0;
    for (auto& c : m.components) {
        c.params[0] = std::exp(theta(at++));
        switch (c.kind) {
            case NoiseKind::PowerLaw:
                c.params[1] = 1.0 / (1.0 + std::exp(-theta(at++)));
                break;
            case NoiseKind::Matern:
                c.params[1] = std::exp(theta(at++));
                c.params[2] = 0.5 + std::exp(theta(at++));
                break;
            default:
                break;
        }
    }
    return m;
}

} // namespace gmwmx

#endif

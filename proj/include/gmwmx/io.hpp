#ifndef GMWMX_IO_HPP
#define GMWMX_IO_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gmwmx/errors.hpp"
#include "gmwmx/estimator.hpp"
#include "gmwmx/version.hpp"

namespace gmwmx {

/// One gappy daily position series on a regular epoch grid. Values are zero
/// and mask is zero exactly where the input file had no row.
struct TimeSeries {
    std::vector<double> epochs; // MJD, strictly increasing, regular
    std::vector<double> values; // mm
    std::vector<std::uint8_t> mask;
    double sampling_period = 1.0; // days
    std::vector<double> offsets;  // MJD

    std::size_t size() const { return epochs.size(); }
};

/// Reads a Hector-style daily position file: header lines
///   # sampling period <float>
///   # offset <MJD>        (repeatable)
/// and data lines "<MJD> <value>". Absent epochs become value 0 / mask 0 on
/// the regular grid from the first to the last observed epoch.
inline TimeSeries read_mom(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    TimeSeries ts;
    std::vector<double> raw_epochs, raw_values;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream is(line.substr(1));
            std::string w1, w2;
            is >> w1 >> w2;
            if (w1 == "sampling" && w2 == "period") {
                if (!(is >> ts.sampling_period) || ts.sampling_period <= 0.0)
                    throw ParseError("bad sampling period at line " + std::to_string(line_no));
            } else if (w1 == "offset") {
                double mjd = 0.0;
                std::istringstream is2(line.substr(1));
                std::string dummy;
                if (!(is2 >> dummy >> mjd))
                    throw ParseError("bad offset at line " + std::to_string(line_no));
                ts.offsets.push_back(mjd);
            }
            continue; // other header lines are ignored
        }
        std::istringstream is(line);
        double mjd = 0.0, value = 0.0;
        if (!(is >> mjd >> value))
            throw ParseError("bad data line " + std::to_string(line_no) + ": '" + line + "'");
        if (!raw_epochs.empty()) {
            if (mjd < raw_epochs.back())
                throw NonMonotoneEpochs("line " + std::to_string(line_no));
            if (mjd == raw_epochs.back()) throw DuplicateEpoch("line " + std::to_string(line_no));
        }
        raw_epochs.push_back(mjd);
        raw_values.push_back(value);
    }
    if (raw_epochs.empty()) throw ParseError("no data lines in " + path);

    const double t0 = raw_epochs.front();
    const double dt = ts.sampling_period;
    const std::size_t n =
        static_cast<std::size_t>(std::llround((raw_epochs.back() - t0) / dt)) + 1;
    ts.epochs.resize(n);
    ts.values.assign(n, 0.0);
    ts.mask.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) ts.epochs[i] = t0 + static_cast<double>(i) * dt;
    for (std::size_t r = 0; r < raw_epochs.size(); ++r) {
        const double pos = (raw_epochs[r] - t0) / dt;
        const auto idx = static_cast<std::size_t>(std::llround(pos));
        if (std::abs(pos - static_cast<double>(idx)) > 1e-6)
            throw ParseError("epoch " + std::to_string(raw_epochs[r]) +
                             " not on the sampling grid");
        if (ts.mask[idx]) throw DuplicateEpoch("epoch " + std::to_string(raw_epochs[r]));
        ts.values[idx] = raw_values[r];
        ts.mask[idx] = 1;
    }
    return ts;
}

/// Writes only the observed rows, so read_mom round-trips the gap structure.
inline void write_mom(const std::string& path, const TimeSeries& ts) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    char buf[80];
    std::snprintf(buf, sizeof(buf), "# sampling period %.17g\n", ts.sampling_period);
    out << buf;
    for (double off : ts.offsets) {
        std::snprintf(buf, sizeof(buf), "# offset %.17g\n", off);
        out << buf;
    }
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (!ts.mask[i]) continue;
        std::snprintf(buf, sizeof(buf), "%.17g %.17g\n", ts.epochs[i], ts.values[i]);
        out << buf;
    }
    if (!out) throw IoError("write failed: " + path);
}

namespace detail {

/// Deterministic number formatting: 17 significant digits round-trips any
/// double bit-exactly.
inline std::string num17(double v) {
    char buf[40];
    if (std::isnan(v)) return "null";
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string json_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

} // namespace detail

inline std::string config_echo_json(const GmwmxConfig& config) {
    using detail::num17;
    std::ostringstream os;
    os << "{\"scales\":" << config.scales << ",\"correction\":\""
       << (config.correction == GmwmxConfig::Correction::ResidualCorrected ? "residual" : "none")
       << "\",\"ci_level\":" << num17(config.ci_level) << ",\"starts\":" << config.starts
       << ",\"seed\":" << config.seed << ",\"ci_method\":\""
       << (config.ci_method == GmwmxConfig::CiMethod::Gaussian ? "gaussian" : "long-memory")
       << "\"}";
    return os.str();
}

/// Fixed-order JSON fit report. Field order and 17-significant-digit number
/// formatting are part of the output contract (the "timings" object is the
/// only run-dependent part).
inline void write_fit(const std::string& path, const FitResult& fit,
                      const GmwmxConfig& config = {}) {
    using detail::json_escape;
    using detail::num17;
    std::ostringstream os;
    os << "{\n  \"beta\": [";
    for (Eigen::Index i = 0; i < fit.beta_hat.size(); ++i) {
        const auto idx = static_cast<std::size_t>(i);
        if (i) os << ",";
        os << "\n    {\"name\": \"" << json_escape(fit.beta_names[idx]) << "\""
           << ", \"estimate\": " << num17(fit.beta_hat(i))
           << ", \"std_error\": " << num17(std::sqrt(std::max(0.0, fit.phi_hat(i, i))))
           << ", \"ci_low\": " << num17(fit.ci_low[idx])
           << ", \"ci_high\": " << num17(fit.ci_high[idx]) << "}";
    }
    os << "\n  ],\n  \"gamma\": [";
    {
        const auto names = fit.noise.param_names();
        const auto vals = fit.noise.gamma();
        for (std::size_t i = 0; i < vals.size(); ++i) {
            if (i) os << ",";
            os << "\n    {\"name\": \"" << json_escape(names[i]) << "\", \"estimate\": "
               << num17(vals[i]) << "}";
        }
    }
    os << "\n  ],\n  \"missingness\": {\"p1\": " << num17(fit.missingness.p1)
       << ", \"p2\": " << num17(fit.missingness.p2)
       << ", \"mu\": " << num17(fit.missingness.mean()) << "},\n  \"wv\": [";
    for (std::size_t j = 0; j < fit.wv_empirical.size(); ++j) {
        if (j) os << ",";
        os << "\n    {\"scale\": " << (j + 1) << ", \"length\": " << (std::size_t(1) << (j + 1))
           << ", \"count\": " << fit.wv_m[j] << ", \"empirical\": " << num17(fit.wv_empirical[j])
           << ", \"fitted\": " << num17(fit.wv_fitted[j]) << "}";
    }
    os << "\n  ],\n  \"objective\": " << num17(fit.objective);
    os << ",\n  \"converged\": " << (fit.converged ? "true" : "false");
    os << ",\n  \"n\": " << fit.n << ",\n  \"n_observed\": " << fit.n_observed;
    os << ",\n  \"timings\": {"
       << "\"least_squares\": " << num17(fit.timings.least_squares)
       << ", \"missingness\": " << num17(fit.timings.missingness)
       << ", \"empirical_wv\": " << num17(fit.timings.empirical_wv)
       << ", \"precompute\": " << num17(fit.timings.precompute)
       << ", \"pilot_fit\": " << num17(fit.timings.pilot_fit)
       << ", \"weighted_fit\": " << num17(fit.timings.weighted_fit)
       << ", \"wv_covariance\": " << num17(fit.timings.wv_covariance)
       << ", \"final_fit\": " << num17(fit.timings.final_fit)
       << ", \"phi\": " << num17(fit.timings.phi)
       << ", \"total\": " << num17(fit.timings.total) << "}";
    os << ",\n  \"config\": " << config_echo_json(config);
    os << ",\n  \"version\": \"" << version() << "\"\n}\n";

    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << os.str();
    if (!out) throw IoError("write failed: " + path);
}

} // namespace gmwmx

#endif

#ifndef GMWMX_SIM_HPP
#define GMWMX_SIM_HPP

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "gmwmx/estimator.hpp"
#include "gmwmx/io.hpp"
#include "gmwmx/missingness.hpp"
#include "gmwmx/noise_model.hpp"

namespace gmwmx {

/// Table of missingness settings (setting 1 = no missingness). Setting 4
/// solves p2 from p1 = 0.05 and E[Z] = 0.70 exactly.
inline MissingnessModel missingness_setting(int idx) {
    switch (idx) {
        case 1: return {0.0, 1.0};
        case 2: return {0.05, 0.45};
        case 3: return {0.05, 0.20};
        case 4: return {0.05, 0.05 * 0.7 / 0.3};
        case 5: return {0.10, 0.15};
        case 6: return {0.10, 0.10};
        default: throw Error(Error::Kind::Usage, "missingness setting must be 1..6");
    }
}

/// Error-process families used in the study settings.
inline NoiseModel noise_setting(char family) {
    switch (family) {
        case 'A': return {{NoiseComponent::white_noise(10.0), NoiseComponent::power_law(6.0, 0.9)}};
        case 'B': return {{NoiseComponent::white_noise(50.0), NoiseComponent::flicker(10.0)}};
        case 'C': return {{NoiseComponent::white_noise(20.0), NoiseComponent::matern(8.0, 0.05, 1.1)}};
        default: throw Error(Error::Kind::Usage, "setting family must be A, B, or C");
    }
}

struct SettingSpec {
    std::string name = "A1";
    NoiseModel noise;
    MissingnessModel missingness;
    std::size_t n = 3650;
    std::size_t replications = 500;
    TrajectoryModel trajectory;
    std::vector<double> beta_true; // empty = zero vector
    std::uint64_t seed = 1;
};

/// Named presets: families A/B/C; the "1" variants fix 10% missingness
/// (setting 2) and vary n, the "2" variants fix n = 7300 and vary the
/// missingness setting. Callers override n / missingness as needed.
inline SettingSpec setting_preset(const std::string& name) {
    if (name.size() != 2 || (name[1] != '1' && name[1] != '2'))
        throw Error(Error::Kind::Usage, "preset must be one of A1,A2,B1,B2,C1,C2");
    SettingSpec spec;
    spec.name = name;
    spec.noise = noise_setting(name[0]);
    spec.missingness = missingness_setting(2); // E[Z] = 0.9
    spec.n = name[1] == '2' ? 7300 : 3650;
    spec.trajectory.t0 = 55000.0;
    spec.trajectory.include_trend = true;
    spec.trajectory.seasonal_frequencies = {TrajectoryModel::annual, TrajectoryModel::semiannual};
    return spec;
}

struct ParamMetrics {
    std::string name;
    double mean = 0.0;
    double bias2 = 0.0;
    double variance = 0.0;
    double rmse = 0.0;
    double coverage = std::nan(""); // NaN = not applicable
    double coverage_se = std::nan("");
};

struct MetricReport {
    std::string setting;
    std::size_t n = 0;
    std::size_t replications = 0;
    std::size_t failures = 0;
    std::vector<ParamMetrics> beta;
    std::vector<ParamMetrics> gamma;
    double mean_runtime = 0.0;
};

/// Fraction of replicates whose CI contains the truth, with binomial SE.
inline std::vector<std::pair<double, double>> coverage(const std::vector<double>& beta_true,
                                                       const std::vector<FitResult>& fits,
                                                       double /*level*/) {
    if (fits.empty()) throw Error(Error::Kind::Usage, "coverage needs at least one fit");
    const std::size_t p = beta_true.size();
    std::vector<std::pair<double, double>> out(p);
    for (std::size_t i = 0; i < p; ++i) {
        std::size_t hits = 0;
        for (const auto& f : fits)
            if (f.ci_low[i] <= beta_true[i] && beta_true[i] <= f.ci_high[i]) ++hits;
        const double m = static_cast<double>(fits.size());
        const double rate = static_cast<double>(hits) / m;
        out[i] = {rate, std::sqrt(rate * (1.0 - rate) / m)};
    }
    return out;
}

inline unsigned worker_count() {
    if (const char* env = std::getenv("GMWMX_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

/// Simulates and fits `replications` series of the given setting; per-
/// replicate failures are recorded, not fatal. Embarrassingly parallel with
/// per-replicate seeds derived from (spec.seed, replicate index).
inline MetricReport run_setting(const SettingSpec& spec, const GmwmxConfig& config,
                                unsigned threads = 0) {
    const std::size_t n = spec.n;
    const std::size_t reps = spec.replications;
    std::vector<double> epochs(n);
    for (std::size_t i = 0; i < n; ++i)
        epochs[i] = spec.trajectory.t0 + static_cast<double>(i);
    const Eigen::MatrixXd x = build_design(epochs, spec.trajectory);
    const std::size_t p = static_cast<std::size_t>(x.cols());
    std::vector<double> beta_true = spec.beta_true;
    if (beta_true.empty()) beta_true.assign(p, 0.0);
    if (beta_true.size() != p)
        throw Error(Error::Kind::Usage, "beta_true dimension mismatch");
    Eigen::Map<const Eigen::VectorXd> bt(beta_true.data(), static_cast<Eigen::Index>(p));
    const Eigen::VectorXd signal = x * bt;

    std::vector<FitResult> fits(reps);
    std::vector<std::uint8_t> ok(reps, 0);
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> failures{0};

    auto worker = [&]() {
        for (;;) {
            const std::size_t r = next.fetch_add(1);
            if (r >= reps) return;
            try {
                std::vector<double> eps = simulate(spec.noise, n, derive_seed(spec.seed, 2 * r));
                std::vector<std::uint8_t> z = simulate(spec.missingness, n,
                                                       derive_seed(spec.seed, 2 * r + 1));
                std::vector<double> y(n);
                for (std::size_t i = 0; i < n; ++i)
                    y[i] = z[i] ? signal(static_cast<Eigen::Index>(i)) + eps[i] : 0.0;
                GmwmxConfig cfg = config;
                cfg.seed = derive_seed(spec.seed, 1000003 + r);
                fits[r] = one_step_gmwmx(epochs, y, z, spec.trajectory, spec.noise, cfg);
                ok[r] = 1;
            } catch (const std::exception&) {
                failures.fetch_add(1);
            }
        }
    };
    unsigned nw = threads ? threads : worker_count();
    nw = std::max(1u, std::min<unsigned>(nw, static_cast<unsigned>(reps)));
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < nw; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    std::vector<FitResult> good;
    good.reserve(reps);
    for (std::size_t r = 0; r < reps; ++r)
        if (ok[r]) good.push_back(std::move(fits[r]));

    MetricReport report;
    report.setting = spec.name;
    report.n = n;
    report.replications = good.size();
    report.failures = failures.load();
    if (good.empty()) return report;

    const double m = static_cast<double>(good.size());
    const auto beta_names = spec.trajectory.param_names();
    report.mean_runtime = 0.0;
    for (const auto& f : good) report.mean_runtime += f.timings.total;
    report.mean_runtime /= m;

    auto metrics_for = [&](const std::string& name, double truth, auto getter) {
        ParamMetrics pm;
        pm.name = name;
        double mean = 0.0;
        for (const auto& f : good) mean += getter(f);
        mean /= m;
        double var = 0.0;
        for (const auto& f : good) {
            const double d = getter(f) - mean;
            var += d * d;
        }
        var /= m;
        pm.mean = mean;
        pm.bias2 = (mean - truth) * (mean - truth);
        pm.variance = var;
        pm.rmse = std::sqrt(pm.bias2 + pm.variance);
        return pm;
    };

    bool any_width = false;
    for (const auto& f : good)
        for (std::size_t i = 0; i < p; ++i)
            if (f.ci_high[i] > f.ci_low[i]) any_width = true;
    const auto cov = coverage(beta_true, good, config.ci_level);
    for (std::size_t i = 0; i < p; ++i) {
        ParamMetrics pm = metrics_for(beta_names[i], beta_true[i], [&](const FitResult& f) {
            return f.beta_hat(static_cast<Eigen::Index>(i));
        });
        if (any_width) {
            pm.coverage = cov[i].first;
            pm.coverage_se = cov[i].second;
        }
        report.beta.push_back(pm);
    }

    const auto gamma_names = spec.noise.param_names();
    const auto gamma_true = spec.noise.gamma();
    for (std::size_t g = 0; g < gamma_true.size(); ++g)
        report.gamma.push_back(metrics_for(gamma_names[g], gamma_true[g], [&](const FitResult& f) {
            return f.noise.gamma()[g];
        }));
    return report;
}

inline void write_report_csv(const std::string& path, const MetricReport& report) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "setting,n,replications,failures,block,parameter,mean,bias2,variance,rmse,"
           "coverage,coverage_se,mean_runtime_s\n";
    auto row = [&](const char* block, const ParamMetrics& pm) {
        out << report.setting << "," << report.n << "," << report.replications << ","
            << report.failures << "," << block << "," << pm.name << "," << detail::num17(pm.mean)
            << "," << detail::num17(pm.bias2) << "," << detail::num17(pm.variance) << ","
            << detail::num17(pm.rmse) << ","
            << (std::isnan(pm.coverage) ? "NA" : detail::num17(pm.coverage)) << ","
            << (std::isnan(pm.coverage_se) ? "NA" : detail::num17(pm.coverage_se)) << ","
            << detail::num17(report.mean_runtime) << "\n";
    };
    for (const auto& pm : report.beta) row("beta", pm);
    for (const auto& pm : report.gamma) row("gamma", pm);
    if (!out) throw IoError("write failed: " + path);
}

inline void write_report_json(const std::string& path, const MetricReport& report) {
    using detail::num17;
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    auto block = [&](const std::vector<ParamMetrics>& v) {
        std::string s = "[";
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) s += ",";
            s += "\n    {\"name\": \"" + v[i].name + "\", \"mean\": " + num17(v[i].mean) +
                 ", \"bias2\": " + num17(v[i].bias2) + ", \"variance\": " + num17(v[i].variance) +
                 ", \"rmse\": " + num17(v[i].rmse) + ", \"coverage\": " + num17(v[i].coverage) +
                 ", \"coverage_se\": " + num17(v[i].coverage_se) + "}";
        }
        return s + "\n  ]";
    };
    out << "{\n  \"setting\": \"" << report.setting << "\",\n  \"n\": " << report.n
        << ",\n  \"replications\": " << report.replications
        << ",\n  \"failures\": " << report.failures
        << ",\n  \"mean_runtime_s\": " << num17(report.mean_runtime)
        << ",\n  \"beta\": " << block(report.beta) << ",\n  \"gamma\": " << block(report.gamma)
        << "\n}\n";
    if (!out) throw IoError("write failed: " + path);
}

} // namespace gmwmx

#endif

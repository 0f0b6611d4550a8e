// gmwmx command line: estimate / simulate / wv / benchmark.
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "gmwmx/gmwmx.hpp"

namespace fs = std::filesystem;
using namespace gmwmx;

namespace {

int parse_scales(const std::string& text, std::size_t n) {
    if (text == "auto") return max_scales(n);
    int j = 0;
    try {
        j = std::stoi(text);
    } catch (const std::exception&) {
        throw Error(Error::Kind::Usage, "--scales expects an integer or 'auto'");
    }
    if (j < 1) throw Error(Error::Kind::Usage, "--scales must be >= 1");
    return j;
}

TrajectoryModel parse_trajectory(const std::string& text, double t0) {
    TrajectoryModel traj;
    traj.t0 = t0;
    traj.include_trend = false;
    std::istringstream is(text);
    std::string tok;
    while (std::getline(is, tok, ',')) {
        if (tok == "trend")
            traj.include_trend = true;
        else if (tok == "annual")
            traj.seasonal_frequencies.push_back(TrajectoryModel::annual);
        else if (tok == "semiannual")
            traj.seasonal_frequencies.push_back(TrajectoryModel::semiannual);
        else if (!tok.empty())
            throw Error(Error::Kind::Usage, "unknown trajectory term '" + tok + "'");
    }
    return traj;
}

int run_estimate(const std::string& input, const std::string& noise_str,
                 const std::string& traj_str, const std::string& scales_str, double ci,
                 const std::string& correction, const std::string& output, bool no_offsets,
                 std::uint64_t seed, const std::string& ci_method) {
    // validate the usage surface before touching the data
    NoiseModel tmpl;
    try {
        tmpl = parse_noise_model(noise_str);
    } catch (const ParseError& e) {
        throw Error(Error::Kind::Usage, e.what());
    }
    GmwmxConfig cfg;
    cfg.ci_level = ci;
    cfg.seed = seed;
    if (correction == "residual")
        cfg.correction = GmwmxConfig::Correction::ResidualCorrected;
    else if (correction == "none")
        cfg.correction = GmwmxConfig::Correction::None;
    else
        throw Error(Error::Kind::Usage, "--correction must be 'residual' or 'none'");
    if (ci_method == "long-memory")
        cfg.ci_method = GmwmxConfig::CiMethod::LongMemoryAuto;
    else if (ci_method != "gaussian")
        throw Error(Error::Kind::Usage, "--ci-method must be 'gaussian' or 'long-memory'");

    TimeSeries ts = read_mom(input);
    TrajectoryModel traj = parse_trajectory(traj_str, ts.epochs.front());
    if (!no_offsets) traj.offset_epochs = ts.offsets;
    cfg.scales = scales_str == "auto" ? 0 : parse_scales(scales_str, ts.size());

    FitResult fit = one_step_gmwmx(ts.epochs, ts.values, ts.mask, traj, tmpl, cfg);
    write_fit(output, fit, cfg);
    std::cerr << "fit written to " << output << " (objective " << fit.objective << ", "
              << fit.timings.total << " s)\n";
    return 0;
}

int run_simulate(const std::string& setting, const std::string& noise_str, std::size_t n,
                 int missing, std::uint64_t seed, const std::string& output) {
    NoiseModel model;
    if (setting == "custom") {
        if (noise_str.empty())
            throw Error(Error::Kind::Usage, "--setting custom requires --noise");
        try {
            model = parse_noise_model(noise_str);
        } catch (const ParseError& e) {
            throw Error(Error::Kind::Usage, e.what());
        }
    } else {
        model = setting_preset(setting).noise;
    }
    const MissingnessModel miss = missingness_setting(missing);
    TimeSeries ts;
    ts.sampling_period = 1.0;
    const double t0 = 55000.0;
    const auto eps = simulate(model, n, derive_seed(seed, 0));
    const auto z = simulate(miss, n, derive_seed(seed, 1));
    ts.epochs.resize(n);
    ts.values.resize(n);
    ts.mask = z;
    for (std::size_t i = 0; i < n; ++i) {
        ts.epochs[i] = t0 + static_cast<double>(i);
        ts.values[i] = z[i] ? eps[i] : 0.0;
    }
    write_mom(output, ts);
    std::cerr << "simulated " << n << " epochs (" << model.to_string() << ", missing setting "
              << missing << ") -> " << output << "\n";
    return 0;
}

int run_wv(const std::string& input, const std::string& scales_str, const std::string& output) {
    TimeSeries ts = read_mom(input);
    const int scales = parse_scales(scales_str, ts.size());
    // centre on the observed mean, keep exact zeros in the gaps
    double mean = 0.0;
    std::size_t nobs = 0;
    for (std::size_t i = 0; i < ts.size(); ++i)
        if (ts.mask[i]) {
            mean += ts.values[i];
            ++nobs;
        }
    if (nobs == 0) throw AllMissing("no observed values");
    mean /= static_cast<double>(nobs);
    std::vector<double> centred(ts.size(), 0.0);
    for (std::size_t i = 0; i < ts.size(); ++i)
        if (ts.mask[i]) centred[i] = ts.values[i] - mean;
    const WvSpectrum s = empirical_wv(centred, scales);

    std::ofstream out(output);
    if (!out) throw IoError("cannot write " + output);
    out << "scale,filter_length,count,wv\n";
    for (int j = 1; j <= scales; ++j)
        out << j << "," << filter_length(j) << "," << s.m[static_cast<std::size_t>(j - 1)] << ","
            << detail::num17(s.nu_hat[static_cast<std::size_t>(j - 1)]) << "\n";
    std::cerr << "wavelet variance (" << scales << " scales) -> " << output << "\n";
    return 0;
}

int run_benchmark(const std::string& setting, std::size_t reps, std::uint64_t seed, std::size_t n,
                  int missing, const std::string& outdir) {
    SettingSpec spec = setting_preset(setting);
    if (n) spec.n = n;
    if (missing) spec.missingness = missingness_setting(missing);
    spec.replications = reps;
    spec.seed = seed;
    GmwmxConfig cfg;
    cfg.starts = 3;
    const MetricReport report = run_setting(spec, cfg, 0);
    fs::create_directories(outdir);
    const std::string base = (fs::path(outdir) / ("report_" + setting)).string();
    write_report_csv(base + ".csv", report);
    write_report_json(base + ".json", report);
    std::cerr << "setting " << setting << ": " << report.replications << " fits, "
              << report.failures << " failures, mean " << report.mean_runtime << " s/fit\n";
    for (const auto& pm : report.beta)
        std::cerr << "  " << pm.name << ": rmse " << pm.rmse << ", coverage "
                  << (std::isnan(pm.coverage) ? std::string("NA") : std::to_string(pm.coverage))
                  << "\n";
    std::cerr << "reports -> " << base << ".{csv,json}\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Scalable regression with dependent errors and missing data"};
    app.require_subcommand(1);

    // estimate
    auto* est = app.add_subcommand("estimate", "fit a trajectory + noise model to a series");
    std::string in_path, output = "fit.json", noise = "wn+pl";
    std::string traj_str = "trend,annual,semiannual", scales_str = "auto";
    std::string correction = "residual", ci_method = "gaussian";
    double ci = 0.95;
    bool no_offsets = false;
    std::uint64_t seed = 0;
    est->add_option("--input", in_path, "input series file")->required();
    est->add_option("--noise", noise, "noise model, e.g. wn+pl or wn(10)+pl(6,0.9)");
    est->add_option("--trajectory", traj_str, "trend[,annual][,semiannual]");
    est->add_option("--scales", scales_str, "number of scales or 'auto'");
    est->add_option("--ci", ci, "confidence level");
    est->add_option("--correction", correction, "residual | none");
    est->add_option("--ci-method", ci_method, "gaussian | long-memory");
    est->add_option("--output", output, "output JSON path");
    est->add_option("--seed", seed, "seed for multi-start perturbations");
    est->add_flag("--no-offsets", no_offsets, "ignore offsets from the input header");

    // simulate
    auto* sim = app.add_subcommand("simulate", "simulate a gappy series");
    std::string sim_setting = "A1", sim_noise, sim_out = "sim.mom";
    std::size_t sim_n = 3650;
    int sim_missing = 2;
    std::uint64_t sim_seed = 1;
    sim->add_option("--setting", sim_setting, "A1|A2|B1|B2|C1|C2|custom");
    sim->add_option("--noise", sim_noise, "noise model string for --setting custom");
    sim->add_option("--n", sim_n, "series length (epochs)");
    sim->add_option("--missing", sim_missing, "missingness setting 1..6")
        ->check(CLI::Range(1, 6));
    sim->add_option("--seed", sim_seed, "simulation seed");
    sim->add_option("--output", sim_out, "output series path");

    // wv
    auto* wv = app.add_subcommand("wv", "empirical wavelet variance of a series");
    std::string wv_in, wv_scales = "auto", wv_out = "wv.csv";
    wv->add_option("--input", wv_in, "input series file")->required();
    wv->add_option("--scales", wv_scales, "number of scales or 'auto'");
    wv->add_option("--output", wv_out, "output CSV path");

    // benchmark
    auto* bench = app.add_subcommand("benchmark", "replicate study for a setting");
    std::string b_setting = "A1", b_out = "bench";
    std::size_t b_reps = 100, b_n = 0;
    int b_missing = 0;
    std::uint64_t b_seed = 1;
    bench->add_option("--setting", b_setting, "A1|A2|B1|B2|C1|C2");
    bench->add_option("--reps", b_reps, "number of replicates");
    bench->add_option("--n", b_n, "series length override");
    bench->add_option("--missing", b_missing, "missingness setting override (1..6)")
        ->check(CLI::Range(0, 6));
    bench->add_option("--seed", b_seed, "master seed");
    bench->add_option("--output", b_out, "output directory");

    try {
        app.parse(argc, argv);
        if (est->parsed())
            return run_estimate(in_path, noise, traj_str, scales_str, ci, correction, output,
                                no_offsets, seed, ci_method);
        if (sim->parsed()) return run_simulate(sim_setting, sim_noise, sim_n, sim_missing,
                                               sim_seed, sim_out);
        if (wv->parsed()) return run_wv(wv_in, wv_scales, wv_out);
        if (bench->parsed()) return run_benchmark(b_setting, b_reps, b_seed, b_n, b_missing, b_out);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.kind()) {
            case Error::Kind::Usage: return 1;
            case Error::Kind::Data: return 2;
            case Error::Kind::Numerical: return 3;
        }
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 1;
}

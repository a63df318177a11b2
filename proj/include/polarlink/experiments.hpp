#pragma once

#include <cstdio>

#include <json.hpp>

#include "polarlink/scenario.hpp"

namespace polarlink {

using ordered_json = nlohmann::ordered_json;

/// Fixed-width-free serialization used for every emitted number: 6
/// significant digits, C locale, LF-only files. Keeps outputs byte-stable
/// across runs and platforms.
inline std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

/// Number as it will appear in files: parsed back from its 6-digit form so
/// JSON summaries and CSV bodies agree exactly.
inline double rounded_number(double v) { return std::stod(format_number(v)); }

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file '" + path.string() + "'");
    out << content;
    if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

/// Trace export: one row per probed bias in measurement order.
inline std::string trace_to_csv(const SweepTrace& trace) {
    std::string csv = "index,vx,vy,power_dbm,t_s\n";
    for (std::size_t i = 0; i < trace.entries.size(); ++i) {
        const SweepEntry& e = trace.entries[i];
        csv += std::to_string(i) + ',' + format_number(e.bias.vx) + ',' +
               format_number(e.bias.vy) + ',' + format_number(e.power_dbm) + ',' +
               format_number(e.time_s) + '\n';
    }
    return csv;
}

/// Dense power matrix over the bias grid, same layout as the rotation table
/// CSV: header row = vx grid, first column = vy grid.
inline std::string heatmap_to_csv(const SweepTrace& trace, double step_volts, double v_min,
                                  double v_max) {
    const int n = static_cast<int>(std::floor((v_max - v_min) / step_volts + 1e-9)) + 1;
    if (trace.entries.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n))
        throw std::invalid_argument("heatmap_to_csv: trace is not a full grid scan");
    std::string csv = "vy\\vx";
    for (int ix = 0; ix < n; ++ix) csv += ',' + format_number(v_min + ix * step_volts);
    csv += '\n';
    for (int iy = 0; iy < n; ++iy) {
        csv += format_number(v_min + iy * step_volts);
        for (int ix = 0; ix < n; ++ix)
            csv += ',' + format_number(trace.entries[static_cast<std::size_t>(iy) * n + ix].power_dbm);
        csv += '\n';
    }
    return csv;
}

inline ordered_json bias_to_json(const BiasSetting& b) {
    return ordered_json{{"vx", rounded_number(b.vx)}, {"vy", rounded_number(b.vy)}};
}

inline ordered_json estimate_to_json(const RotationEstimate& est) {
    return ordered_json{{"schema", 1},
                        {"theta0_deg", rounded_number(est.theta0.degrees)},
                        {"theta_min_deg", rounded_number(est.theta_min_rot)},
                        {"theta_max_deg", rounded_number(est.theta_max_rot)},
                        {"v_min", bias_to_json(est.v_min)},
                        {"v_max", bias_to_json(est.v_max)}};
}

enum class Command { transmissive, reflective, heatmap, estimate, frequency_sweep, power_sweep };

inline Command parse_command(const std::string& name) {
    if (name == "transmissive") return Command::transmissive;
    if (name == "reflective") return Command::reflective;
    if (name == "heatmap") return Command::heatmap;
    if (name == "estimate") return Command::estimate;
    if (name == "frequency-sweep") return Command::frequency_sweep;
    if (name == "power-sweep") return Command::power_sweep;
    throw config_error("unknown command '" + name + "'");
}

struct RunManifest {
    Command command{Command::transmissive};
    std::filesystem::path scenario_path;
    std::filesystem::path out_dir;
    std::optional<std::uint64_t> seed_override;
    double step_volts{1.0};
};

struct RunResult {
    std::vector<std::filesystem::path> files_written;
    ordered_json summary;
    std::vector<std::string> warnings;
};

namespace detail {

inline std::string distance_tag(double d_m) {
    return std::to_string(static_cast<long>(std::llround(d_m * 100.0))) + "cm";
}

inline LinkScenario at_distance(LinkScenario s, double d_m) {
    s.tx_rx_distance_m = d_m;
    return s;
}

inline std::vector<double> distances_or_default(const ScenarioBundle& bundle) {
    if (!bundle.sweep.distances_m.empty()) return bundle.sweep.distances_m;
    return {bundle.link.tx_rx_distance_m};
}

inline double effective_capacity(const LinkReport& r, const std::optional<double>& min_snr) {
    if (min_snr && r.snr_db < *min_snr) return 0.0;
    return r.capacity_bits_per_s_per_hz;
}

}  // namespace detail

/// Baseline-versus-optimized comparison at each configured distance.
inline RunResult run_comparison(const ScenarioBundle& bundle, const RunManifest& manifest) {
    if (!bundle.link.surface)
        throw config_error("comparison: scenario must configure a surface");
    const char* mode_name =
        bundle.link.surface->mode == SurfaceMode::reflective ? "reflective" : "transmissive";
    if (manifest.command == Command::transmissive &&
        bundle.link.surface->mode != SurfaceMode::transmissive)
        throw config_error("transmissive command given a reflective scenario");
    if (manifest.command == Command::reflective &&
        bundle.link.surface->mode != SurfaceMode::reflective)
        throw config_error("reflective command given a transmissive scenario");

    RunResult result;
    ordered_json entries = ordered_json::array();
    for (double d : detail::distances_or_default(bundle)) {
        const LinkScenario s = detail::at_distance(bundle.link, d);
        const LinkReport base = received_power(baseline_scenario(s));
        const OptimizationResult opt = optimize_link(s, bundle.controller);
        const double gain = opt.report.rx_power_dbm - base.rx_power_dbm;
        const double cap_gain =
            opt.report.capacity_bits_per_s_per_hz - base.capacity_bits_per_s_per_hz;

        const std::filesystem::path trace_path =
            manifest.out_dir / ("trace_" + detail::distance_tag(d) + ".csv");
        write_text_file(trace_path, trace_to_csv(opt.trace));
        result.files_written.push_back(trace_path);

        entries.push_back(ordered_json{
            {"distance_m", rounded_number(d)},
            {"baseline_rx_dbm", rounded_number(base.rx_power_dbm)},
            {"optimized_rx_dbm", rounded_number(opt.report.rx_power_dbm)},
            {"gain_db", rounded_number(gain)},
            {"range_extension_factor", rounded_number(range_extension(gain))},
            {"baseline_capacity_bits_per_s_per_hz",
             rounded_number(base.capacity_bits_per_s_per_hz)},
            {"optimized_capacity_bits_per_s_per_hz",
             rounded_number(opt.report.capacity_bits_per_s_per_hz)},
            {"capacity_gain_bits_per_s_per_hz", rounded_number(cap_gain)},
            {"capacity_gain_kbps_per_hz", rounded_number(cap_gain * 1e-3)},
            {"best_bias", bias_to_json(opt.trace.best)},
            {"probe_calls", opt.trace.entries.size()},
            {"sweep_time_s", rounded_number(opt.trace.total_time_s)},
        });
    }
    result.summary =
        ordered_json{{"schema", 1}, {"mode", mode_name}, {"entries", std::move(entries)}};
    const std::filesystem::path path = manifest.out_dir / "comparison.json";
    write_text_file(path, result.summary.dump(2) + "\n");
    result.files_written.push_back(path);
    return result;
}

/// Exhaustive power heatmap per configured distance, plus a summary with the
/// grid optimum and the estimated maximum induced rotation at each distance.
inline RunResult run_heatmap(const ScenarioBundle& bundle, const RunManifest& manifest) {
    if (!bundle.link.surface) throw config_error("heatmap: scenario must configure a surface");
    RunResult result;
    ordered_json entries = ordered_json::array();
    for (double d : detail::distances_or_default(bundle)) {
        const LinkScenario s = detail::at_distance(bundle.link, d);
        const SweepTrace trace =
            exhaustive_sweep(scenario_probe(s), manifest.step_volts, bundle.controller.v_min,
                             bundle.controller.v_max, bundle.controller.settle_time_s);
        const std::filesystem::path path =
            manifest.out_dir / ("heatmap_" + detail::distance_tag(d) + ".csv");
        write_text_file(path, heatmap_to_csv(trace, manifest.step_volts, bundle.controller.v_min,
                                             bundle.controller.v_max));
        result.files_written.push_back(path);

        const RotationEstimate est = estimate_rotation(s, bundle.estimator);
        entries.push_back(ordered_json{
            {"distance_m", rounded_number(d)},
            {"file", path.filename().string()},
            {"max_power_dbm", rounded_number(trace.best_power_dbm)},
            {"best_bias", bias_to_json(trace.best)},
            {"estimated_max_rotation_deg", rounded_number(est.theta_max_rot)},
            {"estimated_min_rotation_deg", rounded_number(est.theta_min_rot)},
        });
    }
    result.summary = ordered_json{{"schema", 1},
                                  {"step_volts", rounded_number(manifest.step_volts)},
                                  {"entries", std::move(entries)}};
    const std::filesystem::path path = manifest.out_dir / "heatmap_summary.json";
    write_text_file(path, result.summary.dump(2) + "\n");
    result.files_written.push_back(path);
    return result;
}

inline RunResult run_estimate(const ScenarioBundle& bundle, const RunManifest& manifest) {
    if (!bundle.link.surface) throw config_error("estimate: scenario must configure a surface");
    RunResult result;
    result.summary = estimate_to_json(estimate_rotation(bundle.link, bundle.estimator));
    const std::filesystem::path path = manifest.out_dir / "estimate.json";
    write_text_file(path, result.summary.dump(2) + "\n");
    result.files_written.push_back(path);
    return result;
}

/// Baseline/optimized improvement across operating frequencies.
inline RunResult run_frequency_sweep(const ScenarioBundle& bundle, const RunManifest& manifest) {
    if (!bundle.link.surface)
        throw config_error("frequency-sweep: scenario must configure a surface");
    std::vector<double> freqs = bundle.sweep.frequencies_hz;
    if (freqs.empty())
        for (int i = 0; i <= 10; ++i) freqs.push_back(2.40e9 + 0.01e9 * i);

    RunResult result;
    std::string csv = "frequency_hz,baseline_rx_dbm,optimized_rx_dbm,improvement_db\n";
    for (double f : freqs) {
        if (f < 2.4e9 || f > 2.5e9)
            result.warnings.push_back("frequency " + format_number(f) +
                                      " Hz is outside the 2.4-2.5 GHz band");
        LinkScenario s = bundle.link;
        s.frequency_hz = f;
        const LinkReport base = received_power(baseline_scenario(s));
        const OptimizationResult opt = optimize_link(s, bundle.controller);
        csv += format_number(f) + ',' + format_number(base.rx_power_dbm) + ',' +
               format_number(opt.report.rx_power_dbm) + ',' +
               format_number(opt.report.rx_power_dbm - base.rx_power_dbm) + '\n';
    }
    const std::filesystem::path path = manifest.out_dir / "frequency_sweep.csv";
    write_text_file(path, csv);
    result.files_written.push_back(path);
    result.summary = ordered_json{{"schema", 1}, {"rows", freqs.size()}};
    return result;
}

namespace detail {

struct PowerPoint {
    double baseline_capacity;
    double optimized_capacity;
};

inline PowerPoint power_point(const ScenarioBundle& bundle, double tx_power_dbm) {
    LinkScenario s = bundle.link;
    s.tx_power_dbm = tx_power_dbm;
    const LinkReport base = received_power(baseline_scenario(s));
    const OptimizationResult opt = optimize_link(s, bundle.controller);
    return {effective_capacity(base, bundle.sweep.min_detectable_snr_db),
            effective_capacity(opt.report, bundle.sweep.min_detectable_snr_db)};
}

}  // namespace detail

/// Capacity-versus-transmit-power curves with and without the surface, and
/// the cut-off power where the surface first provides a capacity benefit
/// (bisected on the continuous curves; absent when it already helps at the
/// lowest swept power or never helps).
inline RunResult run_power_sweep(const ScenarioBundle& bundle, const RunManifest& manifest) {
    if (!bundle.link.surface)
        throw config_error("power-sweep: scenario must configure a surface");
    std::vector<double> powers = bundle.sweep.tx_powers_dbm;
    if (powers.empty())
        for (int i = 0; i <= 24; ++i) powers.push_back(-48.0 + 2.0 * i);

    RunResult result;
    std::string csv = "tx_power_dbm,baseline_capacity_bits_per_s_per_hz,"
                      "optimized_capacity_bits_per_s_per_hz\n";
    std::vector<bool> helps(powers.size());
    for (std::size_t i = 0; i < powers.size(); ++i) {
        const auto pt = detail::power_point(bundle, powers[i]);
        helps[i] = pt.optimized_capacity > pt.baseline_capacity + 1e-12;
        csv += format_number(powers[i]) + ',' + format_number(pt.baseline_capacity) + ',' +
               format_number(pt.optimized_capacity) + '\n';
    }
    const std::filesystem::path csv_path = manifest.out_dir / "power_sweep.csv";
    write_text_file(csv_path, csv);
    result.files_written.push_back(csv_path);

    ordered_json crossover_dbm;  // null unless a crossover is found
    ordered_json crossover_mw;
    const auto first_help = std::find(helps.begin(), helps.end(), true);
    if (first_help != helps.end() && first_help != helps.begin()) {
        const std::size_t i = static_cast<std::size_t>(first_help - helps.begin());
        double lo = powers[i - 1], hi = powers[i];
        for (int iter = 0; iter < 60 && hi - lo > 1e-3; ++iter) {
            const double mid = (lo + hi) / 2.0;
            const auto pt = detail::power_point(bundle, mid);
            (pt.optimized_capacity > pt.baseline_capacity + 1e-12 ? hi : lo) = mid;
        }
        crossover_dbm = rounded_number(hi);
        crossover_mw = rounded_number(std::pow(10.0, hi / 10.0));
    }
    result.summary = ordered_json{{"schema", 1},
                                  {"rows", powers.size()},
                                  {"crossover_tx_power_dbm", crossover_dbm},
                                  {"crossover_tx_power_mw", crossover_mw}};
    const std::filesystem::path path = manifest.out_dir / "power_sweep_summary.json";
    write_text_file(path, result.summary.dump(2) + "\n");
    result.files_written.push_back(path);
    return result;
}

/// Loads the manifest's scenario (applying the seed override), prepares the
/// output directory, and dispatches to the requested experiment.
inline RunResult run_manifest(const RunManifest& manifest) {
    ScenarioBundle bundle = load_scenario(manifest.scenario_path);
    if (manifest.seed_override) bundle.link.rng_seed = *manifest.seed_override;
    if (!(manifest.step_volts > 0.0)) throw config_error("--step must be positive");

    std::error_code ec;
    std::filesystem::create_directories(manifest.out_dir, ec);
    if (ec || !std::filesystem::is_directory(manifest.out_dir))
        throw std::runtime_error("cannot create output directory '" + manifest.out_dir.string() +
                                 "'");

    switch (manifest.command) {
        case Command::transmissive:
        case Command::reflective:
            return run_comparison(bundle, manifest);
        case Command::heatmap:
            return run_heatmap(bundle, manifest);
        case Command::estimate:
            return run_estimate(bundle, manifest);
        case Command::frequency_sweep:
            return run_frequency_sweep(bundle, manifest);
        case Command::power_sweep:
            return run_power_sweep(bundle, manifest);
    }
    throw std::logic_error("unreachable command");
}

}  // namespace polarlink

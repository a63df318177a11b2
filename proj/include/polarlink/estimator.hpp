#pragma once

#include "polarlink/controller.hpp"

namespace polarlink {

/// Maps a receiver orientation (degrees) to a power reading in dBm.
using OrientationProbe = std::function<double(double)>;

struct OrientationSweep {
    std::vector<double> angles_deg;
    std::vector<double> powers_dbm;
};

struct RotationEstimate {
    RotationAngle theta0;    // receiver orientation aligned with the transmitter
    double theta_min_rot{0.0};  // smallest induced rotation, degrees
    double theta_max_rot{0.0};  // largest induced rotation, degrees
    BiasSetting v_min;          // bias giving minimum power at theta0
    BiasSetting v_max;          // bias giving maximum power at theta0
};

/// Folds an orientation difference into [0, 90] degrees; dipole patterns are
/// 180-degree periodic, so larger differences alias back into this range.
inline double fold_orientation_difference(double delta_deg) {
    double d = std::abs(std::fmod(delta_deg, 180.0));
    if (d > 90.0) d = 180.0 - d;
    return d;
}

/// Probes receiver orientations across a 180-degree span at the given
/// resolution and returns the sweep record.
inline OrientationSweep orientation_sweep(const OrientationProbe& probe, double resolution_deg,
                                          double center_deg = 0.0) {
    if (!(resolution_deg > 0.0))
        throw std::invalid_argument("orientation_sweep: resolution must be positive");
    OrientationSweep sweep;
    const int n = static_cast<int>(std::round(180.0 / resolution_deg));
    for (int i = 0; i <= n; ++i) {
        const double a = center_deg - 90.0 + i * resolution_deg;
        sweep.angles_deg.push_back(a);
        sweep.powers_dbm.push_back(probe(a));
    }
    return sweep;
}

/// Orientation with the strongest reading; comparisons happen on the linear
/// power scale. A flat profile carries no alignment information and is
/// rejected as ambiguous.
inline double argmax_orientation(const OrientationSweep& sweep) {
    if (sweep.angles_deg.empty() || sweep.angles_deg.size() != sweep.powers_dbm.size())
        throw std::invalid_argument("argmax_orientation: malformed sweep");
    double best_lin = -1.0, worst_lin = std::numeric_limits<double>::infinity();
    double best_angle = sweep.angles_deg.front();
    for (std::size_t i = 0; i < sweep.angles_deg.size(); ++i) {
        const double lin = std::pow(10.0, sweep.powers_dbm[i] / 10.0);
        if (lin > best_lin) {
            best_lin = lin;
            best_angle = sweep.angles_deg[i];
        }
        worst_lin = std::min(worst_lin, lin);
    }
    if (best_lin - worst_lin <= best_lin * 1e-12)
        throw std::runtime_error("argmax_orientation: flat power profile, alignment ambiguous");
    return best_angle;
}

/// Step 1 of the rotation estimation: rotate the receiver across 180 degrees
/// and return the orientation that maximizes power.
inline RotationAngle find_alignment(const OrientationProbe& probe, double resolution_deg) {
    return RotationAngle(argmax_orientation(orientation_sweep(probe, resolution_deg)));
}

/// Step 2: exhaustive bias scan returning the settings with minimum and
/// maximum power (ties keep the first point in scan order).
inline std::pair<BiasSetting, BiasSetting> find_extreme_biases(const MeasurementProbe& probe,
                                                               double step_volts = 1.0,
                                                               double v_min = 0.0,
                                                               double v_max = 30.0) {
    const SweepTrace trace = exhaustive_sweep(probe, step_volts, v_min, v_max);
    BiasSetting lo_bias = trace.entries.front().bias;
    double lo = trace.entries.front().power_dbm;
    for (const SweepEntry& e : trace.entries) {
        if (e.power_dbm < lo) {
            lo = e.power_dbm;
            lo_bias = e.bias;
        }
    }
    return {lo_bias, trace.best};
}

enum class AlignmentMode {
    // Step 1 runs with the surface biased to its smallest tabulated rotation,
    // the closest available stand-in for "no rotation".
    min_rotation_bias,
    // Step 1 runs with the surface removed from the path entirely.
    surface_absent,
};

struct EstimatorConfig {
    double resolution_deg{1.0};
    double bias_step_volts{1.0};
    AlignmentMode alignment_mode{AlignmentMode::min_rotation_bias};
};

namespace detail {

inline BiasSetting min_rotation_bias(const LinkScenario& s, double step_volts) {
    const RotationTable& table = s.surface->rotation_table;
    BiasSetting best{0.0, 0.0};
    double best_rot = std::numeric_limits<double>::infinity();
    const int n = static_cast<int>(std::floor(30.0 / step_volts + 1e-9)) + 1;
    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            const BiasSetting b{ix * step_volts, iy * step_volts};
            const double rot = bias_to_rotation(table, b).degrees;
            if (rot < best_rot) {
                best_rot = rot;
                best = b;
            }
        }
    }
    return best;
}

inline OrientationProbe orientation_probe(const LinkScenario& s,
                                          const std::optional<BiasSetting>& bias) {
    return [s, bias](double angle_deg) {
        LinkScenario probe_scenario = s;
        probe_scenario.rx_orientation = RotationAngle(angle_deg);
        return received_power(probe_scenario, bias).rx_power_dbm;
    };
}

}  // namespace detail

/// Full three-step rotation-degree estimation:
///   1. find the aligned receiver orientation theta0 with the surface held
///      at (or removed to approximate) zero rotation,
///   2. scan biases at theta0 for the minimum- and maximum-power settings,
///   3. re-sweep the receiver at each of those settings; the orientation
///      shifts away from theta0 give the max and min induced rotation.
inline RotationEstimate estimate_rotation(const LinkScenario& s, const EstimatorConfig& cfg = {}) {
    if (!s.surface) throw std::invalid_argument("estimate_rotation: scenario has no surface");
    if (!(cfg.resolution_deg > 0.0))
        throw std::invalid_argument("estimate_rotation: resolution must be positive");

    RotationEstimate est;

    if (cfg.alignment_mode == AlignmentMode::surface_absent) {
        est.theta0 = find_alignment(detail::orientation_probe(baseline_scenario(s), std::nullopt),
                                    cfg.resolution_deg);
    } else {
        const BiasSetting quiet = detail::min_rotation_bias(s, cfg.bias_step_volts);
        est.theta0 =
            find_alignment(detail::orientation_probe(s, quiet), cfg.resolution_deg);
    }

    LinkScenario aligned = s;
    aligned.rx_orientation = est.theta0;
    std::tie(est.v_min, est.v_max) =
        find_extreme_biases(scenario_probe(aligned), cfg.bias_step_volts);

    // Minimum power at theta0 means the strongest rotation away from
    // alignment, so v_min yields the larger orientation shift.
    const double at_v_min = argmax_orientation(orientation_sweep(
        detail::orientation_probe(s, est.v_min), cfg.resolution_deg, est.theta0.degrees));
    const double at_v_max = argmax_orientation(orientation_sweep(
        detail::orientation_probe(s, est.v_max), cfg.resolution_deg, est.theta0.degrees));

    const double rot_a = fold_orientation_difference(at_v_min - est.theta0.degrees);
    const double rot_b = fold_orientation_difference(at_v_max - est.theta0.degrees);
    est.theta_min_rot = std::min(rot_a, rot_b);
    est.theta_max_rot = std::max(rot_a, rot_b);
    return est;
}

}  // namespace polarlink

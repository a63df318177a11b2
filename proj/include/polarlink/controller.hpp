#pragma once

#include <functional>

#include "polarlink/channel.hpp"

namespace polarlink {

/// Maps a bias setting to a power reading in dBm.
using MeasurementProbe = std::function<double(const BiasSetting&)>;

enum class RefinementRule {
    // Next window is [best - step, best]: the published update rule. Biases
    // refinement downward in voltage since the true optimum may sit above
    // the best coarse grid point.
    trailing,
    // Next window is [best - step/2, best + step/2]; not the published rule,
    // but can outperform it when the optimum lies just above a grid point.
    centered,
};

struct SweepConfig {
    int n_iterations{2};
    int steps_per_axis{5};
    double v_min{0.0};
    double v_max{30.0};
    double settle_time_s{0.02};  // 50 Hz supply switching
    RefinementRule refinement{RefinementRule::trailing};
    // Number of measurements by which readings trail the bias actually
    // applied; nonzero models an unsynchronized supply/receiver pair.
    int attribution_lag{0};

    void validate() const {
        if (n_iterations < 1) throw std::invalid_argument("SweepConfig: n_iterations must be >= 1");
        if (steps_per_axis < 2)
            throw std::invalid_argument("SweepConfig: steps_per_axis must be >= 2");
        if (!(v_min < v_max)) throw std::invalid_argument("SweepConfig: v_min must be < v_max");
        if (!(settle_time_s > 0.0))
            throw std::invalid_argument("SweepConfig: settle time must be positive");
        if (attribution_lag < 0)
            throw std::invalid_argument("SweepConfig: attribution lag must be >= 0");
    }
};

struct SweepEntry {
    BiasSetting bias;
    double power_dbm{0.0};
    double time_s{0.0};
};

struct SweepTrace {
    std::vector<SweepEntry> entries;
    BiasSetting best;
    double best_power_dbm{-std::numeric_limits<double>::infinity()};
    double total_time_s{0.0};
};

/// Probe failure carrying the measurements collected up to that point.
class sweep_error : public std::runtime_error {
  public:
    sweep_error(const std::string& what, SweepTrace partial)
        : std::runtime_error(what), partial_trace(std::move(partial)) {}
    SweepTrace partial_trace;
};

namespace detail {

class TraceRecorder {
  public:
    TraceRecorder(const MeasurementProbe& probe, double settle_time_s, int lag)
        : probe_(probe), settle_(settle_time_s), lag_(lag) {}

    // Returns the power attributed to this measurement: the raw reading
    // `lag` samples back (the first reading for the leading edge).
    double measure(const BiasSetting& b) {
        double raw = 0.0;
        try {
            raw = probe_(b);
        } catch (const std::exception& e) {
            throw sweep_error(std::string("probe failed at (") + std::to_string(b.vx) + ", " +
                                  std::to_string(b.vy) + "): " + e.what(),
                              trace_);
        }
        raw_.push_back(raw);
        const std::size_t i = raw_.size() - 1;
        const double attributed = raw_[i >= static_cast<std::size_t>(lag_) ? i - lag_ : 0];
        trace_.entries.push_back({b, attributed, settle_ * static_cast<double>(i + 1)});
        if (attributed > trace_.best_power_dbm) {
            trace_.best_power_dbm = attributed;
            trace_.best = b;
        }
        return attributed;
    }

    SweepTrace finish() {
        trace_.total_time_s = settle_ * static_cast<double>(trace_.entries.size());
        return std::move(trace_);
    }

  private:
    const MeasurementProbe& probe_;
    double settle_;
    int lag_;
    std::vector<double> raw_;
    SweepTrace trace_;
};

}  // namespace detail

/// Coarse-to-fine bias search.
///
/// Each iteration lays a T x T grid over the current per-axis windows
/// (grid point tau in 1..T sits at v_min + (tau-1) (v_max - v_min)/T), probes
/// every combination with the x axis as the inner loop, then shrinks each
/// axis window around the strongest combination: [best - step, best] under
/// the trailing rule, clamped to the global voltage range. Ties keep the
/// first point in scan order. Issues exactly n_iterations * T^2 probe calls;
/// the returned best is the strongest entry of the whole trace.
inline SweepTrace coarse_to_fine_sweep(const MeasurementProbe& probe, const SweepConfig& cfg) {
    cfg.validate();
    const int t = cfg.steps_per_axis;
    detail::TraceRecorder rec(probe, cfg.settle_time_s, cfg.attribution_lag);

    double x_lo = cfg.v_min, x_hi = cfg.v_max;
    double y_lo = cfg.v_min, y_hi = cfg.v_max;
    for (int n = 0; n < cfg.n_iterations; ++n) {
        const double x_step = (x_hi - x_lo) / t;
        const double y_step = (y_hi - y_lo) / t;
        BiasSetting iter_best;
        double iter_best_power = -std::numeric_limits<double>::infinity();
        for (int ty = 0; ty < t; ++ty) {
            for (int tx = 0; tx < t; ++tx) {
                const BiasSetting b{x_lo + tx * x_step, y_lo + ty * y_step};
                const double p = rec.measure(b);
                if (p > iter_best_power) {
                    iter_best_power = p;
                    iter_best = b;
                }
            }
        }
        if (cfg.refinement == RefinementRule::trailing) {
            x_lo = iter_best.vx - x_step;
            x_hi = iter_best.vx;
            y_lo = iter_best.vy - y_step;
            y_hi = iter_best.vy;
        } else {
            x_lo = iter_best.vx - x_step / 2.0;
            x_hi = iter_best.vx + x_step / 2.0;
            y_lo = iter_best.vy - y_step / 2.0;
            y_hi = iter_best.vy + y_step / 2.0;
        }
        x_lo = std::clamp(x_lo, cfg.v_min, cfg.v_max);
        x_hi = std::clamp(x_hi, cfg.v_min, cfg.v_max);
        y_lo = std::clamp(y_lo, cfg.v_min, cfg.v_max);
        y_hi = std::clamp(y_hi, cfg.v_min, cfg.v_max);
    }
    return rec.finish();
}

/// Full grid scan at a fixed voltage step over [v_min, v_max] on both axes;
/// ((v_max - v_min)/step + 1)^2 probe calls. Serves as the search oracle.
inline SweepTrace exhaustive_sweep(const MeasurementProbe& probe, double step_volts,
                                   double v_min = 0.0, double v_max = 30.0,
                                   double settle_time_s = 0.02, int attribution_lag = 0) {
    if (!(step_volts > 0.0))
        throw std::invalid_argument("exhaustive_sweep: step must be positive");
    if (!(v_min < v_max)) throw std::invalid_argument("exhaustive_sweep: v_min must be < v_max");
    const int n = static_cast<int>(std::floor((v_max - v_min) / step_volts + 1e-9)) + 1;
    detail::TraceRecorder rec(probe, settle_time_s, attribution_lag);
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix)
            rec.measure({v_min + ix * step_volts, v_min + iy * step_volts});
    return rec.finish();
}

/// Probe that reads the receiver of a link scenario at a given bias.
inline MeasurementProbe scenario_probe(const LinkScenario& s) {
    if (!s.surface)
        throw std::invalid_argument("scenario_probe: scenario has no surface to bias");
    return [s](const BiasSetting& b) { return received_power(s, b).rx_power_dbm; };
}

struct OptimizationResult {
    SweepTrace trace;
    LinkReport report;  // link state at the chosen bias
};

/// Runs the coarse-to-fine search against a scenario's receiver and reports
/// the link at the winning bias.
inline OptimizationResult optimize_link(const LinkScenario& s, const SweepConfig& cfg) {
    const SweepTrace trace = coarse_to_fine_sweep(scenario_probe(s), cfg);
    return {trace, received_power(s, trace.best)};
}

}  // namespace polarlink

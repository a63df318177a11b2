#pragma once

#include <bit>
#include <cstdint>
#include <optional>
#include <random>

#include "polarlink/metasurface.hpp"

namespace polarlink {

inline constexpr double speed_of_light = 299792458.0;

/// Free-space path loss in dB: 20 log10(4 pi d f / c).
inline double free_space_path_loss(double distance_m, double frequency_hz) {
    if (!(distance_m > 0.0))
        throw std::invalid_argument("free_space_path_loss: distance must be positive");
    if (!(frequency_hz > 0.0))
        throw std::invalid_argument("free_space_path_loss: frequency must be positive");
    return 20.0 * std::log10(4.0 * pi * distance_m * frequency_hz / speed_of_light);
}

/// Polarization mismatch loss for linear dipoles: Malus's law with a finite
/// cross-polarization floor, max(10 log10(cos^2 dtheta), floor_db).
inline double mismatch_loss(const RotationAngle& delta_theta, double floor_db) {
    if (!(floor_db < 0.0))
        throw std::invalid_argument("mismatch_loss: floor must be negative dB");
    const double c = std::cos(delta_theta.radians());
    const double cos2 = c * c;
    if (cos2 <= 0.0) return floor_db;
    return std::max(10.0 * std::log10(cos2), floor_db);
}

/// Shannon spectral efficiency: log2(1 + 10^(snr_db/10)).
inline double capacity(double snr_db) {
    if (std::isnan(snr_db)) throw std::invalid_argument("capacity: NaN SNR");
    if (snr_db == -std::numeric_limits<double>::infinity()) return 0.0;
    return std::log2(1.0 + db_to_power(snr_db));
}

/// Free-space range factor bought by a power gain: 10^(gain_db/20).
inline double range_extension(double power_gain_db) {
    if (!std::isfinite(power_gain_db))
        throw std::invalid_argument("range_extension: non-finite gain");
    return std::pow(10.0, power_gain_db / 20.0);
}

/// Solid angle subtended by a square plate of side `side` seen on-axis from
/// distance z (pyramid solid-angle formula).
inline double square_plate_solid_angle(double side, double z) {
    if (side <= 0.0) return 0.0;
    if (!(z > 0.0)) return 2.0 * pi;
    const double a = side / 2.0;
    return 4.0 * std::atan(a * a / (z * std::sqrt(z * z + 2.0 * a * a)));
}

/// Fraction of the received power that travels around the surface instead of
/// through it. The through-path power coupling is modelled as
/// (cover_tx * cover_rx)^1.5, where cover is the surface's coverage fraction
/// seen from an endpoint (solid angle over the facing hemisphere for omni
/// antennas, over a beam cone for directional ones); the bypass fraction is
/// the complement. The 3/2 exponent is an empirical fit to how quickly the
/// perceived rotation shrinks with link distance; the model is a calibrated
/// heuristic, not a diffraction result.
inline double bypass_fraction_from_geometry(double tx_rx_distance, double surface_side,
                                            double surface_distance,
                                            double beamwidth_deg = 180.0) {
    if (!(tx_rx_distance > 0.0) || !(surface_distance > 0.0))
        throw std::invalid_argument("bypass_fraction_from_geometry: distances must be positive");
    if (surface_side < 0.0)
        throw std::invalid_argument("bypass_fraction_from_geometry: negative surface side");
    if (!(beamwidth_deg > 0.0) || beamwidth_deg > 180.0)
        throw std::invalid_argument("bypass_fraction_from_geometry: beamwidth outside (0, 180]");
    if (surface_side == 0.0) return 1.0;
    const double ref = 2.0 * pi * (1.0 - std::cos(deg_to_rad(beamwidth_deg / 2.0)));
    const double z_tx = surface_distance;
    const double z_rx = std::max(tx_rx_distance - surface_distance, 1e-9);
    const double cover_tx = std::min(1.0, square_plate_solid_angle(surface_side, z_tx) / ref);
    const double cover_rx = std::min(1.0, square_plate_solid_angle(surface_side, z_rx) / ref);
    const double through_power = std::pow(cover_tx * cover_rx, 1.5);
    return std::clamp(1.0 - through_power, 0.0, 1.0);
}

/// Additional propagation path folded into the coherent field sum at the
/// receiver (multipath study hook). Amplitude is linear, relative to the
/// direct path's unit field.
struct ExtraRay {
    double amplitude{0.0};
    double phase_deg{0.0};
    double polarization_deg{0.0};
};

struct LinkScenario {
    double frequency_hz{2.44e9};
    double tx_power_dbm{0.0};
    RotationAngle tx_orientation{0.0};
    RotationAngle rx_orientation{0.0};
    double tx_rx_distance_m{1.0};
    std::optional<SurfaceModel> surface;
    double tx_surface_distance_m{0.5};
    double surface_side_m{0.48};
    // Power fraction bypassing the surface; nullopt derives it from geometry.
    std::optional<double> bypass_fraction;
    double combining_phase_deg{0.0};
    double antenna_beamwidth_deg{180.0};
    double crosspol_floor_db{-30.0};
    double noise_floor_dbm{-90.0};
    double noise_sigma_db{0.5};
    int n_averages{1};
    double tx_gain_dbi{0.0};
    double rx_gain_dbi{0.0};
    std::uint64_t rng_seed{42};
    std::vector<ExtraRay> extra_rays;

    void validate() const {
        if (!(frequency_hz > 0.0)) throw std::invalid_argument("scenario: frequency must be positive");
        if (!(tx_rx_distance_m > 0.0))
            throw std::invalid_argument("scenario: tx-rx distance must be positive");
        if (!(tx_surface_distance_m > 0.0))
            throw std::invalid_argument("scenario: tx-surface distance must be positive");
        if (surface_side_m < 0.0) throw std::invalid_argument("scenario: negative surface side");
        if (bypass_fraction && (*bypass_fraction < 0.0 || *bypass_fraction > 1.0))
            throw std::invalid_argument("scenario: bypass fraction outside [0, 1]");
        if (!(crosspol_floor_db < 0.0))
            throw std::invalid_argument("scenario: cross-polarization floor must be negative");
        if (noise_sigma_db < 0.0) throw std::invalid_argument("scenario: negative noise sigma");
        if (n_averages < 1) throw std::invalid_argument("scenario: n_averages must be >= 1");
        if (surface) surface->validate();
    }

    double effective_bypass_fraction() const {
        if (bypass_fraction) return *bypass_fraction;
        return bypass_fraction_from_geometry(tx_rx_distance_m, surface_side_m,
                                             tx_surface_distance_m, antenna_beamwidth_deg);
    }

    /// Geometric length of the reflected path: the surface sits on the
    /// perpendicular bisector of the endpoint pair, offset by
    /// tx_surface_distance_m.
    double reflected_path_length() const {
        return 2.0 * std::hypot(tx_surface_distance_m, tx_rx_distance_m / 2.0);
    }
};

struct LinkReport {
    double rx_power_dbm{0.0};
    double snr_db{0.0};
    double capacity_bits_per_s_per_hz{0.0};
    double mismatch_deg{0.0};
};

namespace detail {

inline complex inner(const PolarizationState& a, const PolarizationState& b) {
    return std::conj(a.ex) * b.ex + std::conj(a.ey) * b.ey;
}

// Per-measurement generator: derived from the scenario seed and the
// measurement configuration, so repeated calls are reproducible while
// distinct biases or orientations draw independent noise.
inline std::mt19937_64 measurement_rng(const LinkScenario& s,
                                       const std::optional<BiasSetting>& b) {
    auto lo = [](double v) {
        return static_cast<std::uint32_t>(std::bit_cast<std::uint64_t>(v));
    };
    auto hi = [](double v) {
        return static_cast<std::uint32_t>(std::bit_cast<std::uint64_t>(v) >> 32);
    };
    std::seed_seq seq{static_cast<std::uint32_t>(s.rng_seed),
                      static_cast<std::uint32_t>(s.rng_seed >> 32),
                      lo(b ? b->vx : -1.0), hi(b ? b->vx : -1.0),
                      lo(b ? b->vy : -1.0), hi(b ? b->vy : -1.0),
                      lo(s.rx_orientation.degrees), hi(s.rx_orientation.degrees),
                      lo(s.frequency_hz), hi(s.frequency_hz)};
    return std::mt19937_64(seq);
}

}  // namespace detail

/// Simulated receiver power reading plus derived link metrics.
///
/// The arriving field is the coherent sum of a through-surface component
/// (rotated and attenuated by the surface, amplitude weight sqrt(1 - bypass))
/// and an unrotated bypass component (weight sqrt(bypass), offset by the
/// configured combining phase), plus any extra rays. The receive antenna
/// captures the co-polarized projection, bounded below by the
/// cross-polarization floor acting on the total arriving power. Reflective
/// mode routes the surface component over the tx -> surface -> rx path and
/// treats the bypass component as the direct line-of-sight path.
inline LinkReport received_power(const LinkScenario& s, const std::optional<BiasSetting>& bias) {
    s.validate();
    if (s.surface && !bias)
        throw std::invalid_argument("received_power: surface present but no bias given");
    if (!s.surface && bias)
        throw std::invalid_argument("received_power: bias given but scenario has no surface");

    const PolarizationState tx_field = PolarizationState::linear(s.tx_orientation.degrees);
    const PolarizationState rx_axis = PolarizationState::linear(s.rx_orientation.degrees);

    PolarizationState field{complex(0, 0), complex(0, 0)};
    if (!s.surface) {
        field = tx_field;
    } else {
        const double f = s.effective_bypass_fraction();
        const complex bypass_phase = std::polar(1.0, deg_to_rad(s.combining_phase_deg));
        const JonesOperator op = surface_operator(*s.surface, *bias, s.frequency_hz);
        PolarizationState through = apply(op, tx_field);
        double through_weight = std::sqrt(1.0 - f);
        if (s.surface->mode == SurfaceMode::reflective) {
            // Longer reflected path, expressed relative to the direct path.
            const double excess_db = free_space_path_loss(s.reflected_path_length(), s.frequency_hz) -
                                     free_space_path_loss(s.tx_rx_distance_m, s.frequency_hz);
            through_weight *= db_to_amplitude(-excess_db);
        }
        const double bypass_weight = std::sqrt(f);
        field.ex = through_weight * through.ex + bypass_weight * bypass_phase * tx_field.ex;
        field.ey = through_weight * through.ey + bypass_weight * bypass_phase * tx_field.ey;
    }
    for (const ExtraRay& ray : s.extra_rays) {
        const complex w = std::polar(ray.amplitude, deg_to_rad(ray.phase_deg));
        const PolarizationState pol = PolarizationState::linear(ray.polarization_deg);
        field.ex += w * pol.ex;
        field.ey += w * pol.ey;
    }

    const double total = intensity(field);
    const double co_pol = std::norm(detail::inner(rx_axis, field));
    const double floor_lin = db_to_power(s.crosspol_floor_db);
    const double captured = std::max(co_pol, floor_lin * total);

    double mismatch_deg = 90.0;
    if (total > 0.0)
        mismatch_deg = rad_to_deg(std::acos(std::clamp(std::sqrt(co_pol / total), 0.0, 1.0)));

    const double fspl = free_space_path_loss(s.tx_rx_distance_m, s.frequency_hz);
    double rx_dbm = s.tx_power_dbm + s.tx_gain_dbi + s.rx_gain_dbi - fspl;
    rx_dbm += captured > 0.0 ? 10.0 * std::log10(captured) : -400.0;

    if (s.noise_sigma_db > 0.0) {
        auto rng = detail::measurement_rng(s, bias);
        const double p_mw = std::pow(10.0, rx_dbm / 10.0);
        const double sigma_lin = p_mw * (db_to_power(s.noise_sigma_db) - 1.0);
        std::normal_distribution<double> dist(0.0, sigma_lin);
        double sum = 0.0;
        for (int i = 0; i < s.n_averages; ++i) sum += std::max(p_mw + dist(rng), 1e-30);
        rx_dbm = 10.0 * std::log10(sum / s.n_averages);
    }

    LinkReport report;
    report.rx_power_dbm = rx_dbm;
    report.snr_db = rx_dbm - s.noise_floor_dbm;
    report.capacity_bits_per_s_per_hz = capacity(report.snr_db);
    report.mismatch_deg = mismatch_deg;
    return report;
}

inline LinkReport received_power(const LinkScenario& s) { return received_power(s, std::nullopt); }

/// Same scenario with the surface removed; the no-surface reference link.
inline LinkScenario baseline_scenario(LinkScenario s) {
    s.surface.reset();
    return s;
}

}  // namespace polarlink

#pragma once

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "polarlink/jones.hpp"

namespace polarlink {

/// Pair of phase-shifter bias voltages, one per axis, in volts.
struct BiasSetting {
    double vx{0.0};
    double vy{0.0};
};

/// Measured bias-voltage -> rotation-degree calibration grid.
/// theta[iy][ix] is the rotation for (vx_grid[ix], vy_grid[iy]).
struct RotationTable {
    std::vector<double> vx_grid;
    std::vector<double> vy_grid;
    std::vector<std::vector<double>> theta;

    void validate() const {
        if (vx_grid.size() < 2 || vy_grid.size() < 2)
            throw std::invalid_argument("RotationTable: grids need at least two points");
        for (std::size_t i = 1; i < vx_grid.size(); ++i)
            if (vx_grid[i] <= vx_grid[i - 1])
                throw std::invalid_argument("RotationTable: vx grid not strictly ascending");
        for (std::size_t i = 1; i < vy_grid.size(); ++i)
            if (vy_grid[i] <= vy_grid[i - 1])
                throw std::invalid_argument("RotationTable: vy grid not strictly ascending");
        if (theta.size() != vy_grid.size())
            throw std::invalid_argument("RotationTable: row count does not match vy grid");
        for (const auto& row : theta) {
            if (row.size() != vx_grid.size())
                throw std::invalid_argument("RotationTable: column count does not match vx grid");
            for (double v : row)
                if (!(v >= 0.0 && v <= 90.0))
                    throw std::invalid_argument("RotationTable: rotation outside [0, 90] degrees");
        }
    }

    double min_rotation() const {
        double m = theta[0][0];
        for (const auto& row : theta)
            for (double v : row) m = std::min(m, v);
        return m;
    }

    double max_rotation() const {
        double m = theta[0][0];
        for (const auto& row : theta)
            for (double v : row) m = std::max(m, v);
        return m;
    }
};

/// Simulated calibration of the 2.4 GHz rotator prototype: rotation degrees
/// over a 7x7 grid of (Vx, Vy) bias voltages. The device responds only
/// within the 2-15 V calibrated window; outside it readings clamp to the
/// nearest edge. The underlying varactor capacitance range (0.84-2.41 pF)
/// is not modelled, only this measured map.
inline const RotationTable& builtin_rotation_table() {
    static const RotationTable table = [] {
        RotationTable t;
        t.vx_grid = {2, 3, 4, 5, 6, 10, 15};
        t.vy_grid = {2, 3, 4, 5, 6, 10, 15};
        t.theta = {
            {11.6, 26.1, 36.8, 41.0, 44.3, 48.3, 48.7},
            {6.5, 12.4, 26.6, 32.2, 35.2, 38.6, 39.2},
            {23.0, 4.9, 10.9, 17.3, 20.8, 25.0, 25.6},
            {27.0, 9.3, 7.4, 14.0, 18.0, 22.6, 23.2},
            {41.8, 25.0, 7.9, 2.1, 4.2, 10.2, 10.7},
            {45.8, 30.0, 13.7, 7.9, 2.8, 5.1, 5.6},
            {48.2, 33.1, 18.2, 12.9, 7.3, 1.9, 2.0},
        };
        t.validate();
        return t;
    }();
    return table;
}

namespace detail {

// Index of the cell containing v after clamping to the grid range, plus the
// interpolation parameter within that cell.
inline std::pair<std::size_t, double> grid_locate(const std::vector<double>& grid, double v) {
    const double clamped = std::clamp(v, grid.front(), grid.back());
    std::size_t i = 0;
    while (i + 2 < grid.size() && clamped >= grid[i + 1]) ++i;
    const double t = (clamped - grid[i]) / (grid[i + 1] - grid[i]);
    return {i, t};
}

}  // namespace detail

/// Bilinear interpolation of the rotation grid; bias values outside the
/// calibrated window clamp to the nearest edge. Exact at grid points.
inline RotationAngle bias_to_rotation(const RotationTable& table, const BiasSetting& b) {
    const auto [ix, tx] = detail::grid_locate(table.vx_grid, b.vx);
    const auto [iy, ty] = detail::grid_locate(table.vy_grid, b.vy);
    const double q00 = table.theta[iy][ix];
    const double q01 = table.theta[iy][ix + 1];
    const double q10 = table.theta[iy + 1][ix];
    const double q11 = table.theta[iy + 1][ix + 1];
    const double top = q00 + tx * (q01 - q00);
    const double bot = q10 + tx * (q11 - q10);
    return RotationAngle(top + ty * (bot - top));
}

enum class QwpSign { plus45, minus45 };

/// Quarter-wave plate tilted +-45 degrees from the device axes.
///
/// The tilt convention is fixed so that the three-element stack
/// cascade([qwp(minus45), bfs(delta), qwp(plus45)]) rotates polarization by
/// +delta/2 (counterclockwise) up to a global phase; the opposite assignment
/// would rotate by -delta/2 instead and is not exposed.
inline JonesOperator qwp_operator(QwpSign sign) {
    static const JonesOperator plate = JonesOperator::diagonal(complex(1, 0), complex(0, 1));
    const double tilt = (sign == QwpSign::plus45) ? -45.0 : 45.0;
    return rotate_operator(plate, RotationAngle(tilt));
}

/// Tunable birefringent structure: phase difference delta (radians) between
/// the x and y field components, diag(1, e^{j delta}).
inline JonesOperator bfs_operator(double delta_rad) {
    if (!std::isfinite(delta_rad))
        throw std::invalid_argument("bfs_operator: non-finite phase");
    return JonesOperator::diagonal(complex(1, 0), std::polar(1.0, delta_rad));
}

/// Full QWP/BFS/QWP rotator stack; equals rotation_matrix(delta/2) up to a
/// global phase of e^{j(pi/2 + delta/2)}.
inline JonesOperator rotator_operator(double delta_rad) {
    return cascade({qwp_operator(QwpSign::minus45), bfs_operator(delta_rad),
                    qwp_operator(QwpSign::plus45)});
}

enum class SurfaceMode { transmissive, reflective };

/// Behavioral model of the tunable surface: measured rotation map, flat (or
/// tabulated) insertion loss, and the operating mode. In reflective mode the
/// effective rotation is scaled by reflective_rotation_factor, since part of
/// the rotation cancels on the return pass.
struct SurfaceModel {
    RotationTable rotation_table = builtin_rotation_table();
    double insertion_loss_db{-5.0};
    SurfaceMode mode{SurfaceMode::transmissive};
    double reflective_rotation_factor{0.3};
    // Optional (frequency Hz, insertion loss dB) pairs; empty means flat loss.
    std::vector<std::pair<double, double>> loss_table;

    void validate() const {
        rotation_table.validate();
        if (insertion_loss_db > 0.0)
            throw std::invalid_argument("SurfaceModel: insertion loss must be <= 0 dB");
        if (reflective_rotation_factor < 0.0 || reflective_rotation_factor > 1.0)
            throw std::invalid_argument("SurfaceModel: rotation factor outside [0, 1]");
        for (std::size_t i = 1; i < loss_table.size(); ++i)
            if (loss_table[i].first <= loss_table[i - 1].first)
                throw std::invalid_argument("SurfaceModel: loss table frequencies not ascending");
    }

    /// Insertion loss at a given frequency; linear interpolation over the
    /// loss table (clamped at the ends), flat default otherwise.
    double insertion_loss_at(double frequency_hz) const {
        if (loss_table.empty()) return insertion_loss_db;
        if (frequency_hz <= loss_table.front().first) return loss_table.front().second;
        if (frequency_hz >= loss_table.back().first) return loss_table.back().second;
        std::size_t i = 0;
        while (i + 2 < loss_table.size() && frequency_hz >= loss_table[i + 1].first) ++i;
        const auto [f0, l0] = loss_table[i];
        const auto [f1, l1] = loss_table[i + 1];
        return l0 + (frequency_hz - f0) / (f1 - f0) * (l1 - l0);
    }

    double effective_rotation_deg(const BiasSetting& b) const {
        const double table_deg = bias_to_rotation(rotation_table, b).degrees;
        return mode == SurfaceMode::reflective ? reflective_rotation_factor * table_deg
                                               : table_deg;
    }
};

inline double db_to_amplitude(double db) { return std::pow(10.0, db / 20.0); }
inline double db_to_power(double db) { return std::pow(10.0, db / 10.0); }

/// Jones operator of the biased surface at a given frequency: a pure rotation
/// by the effective angle scaled by the insertion-loss amplitude.
inline JonesOperator surface_operator(const SurfaceModel& model, const BiasSetting& b,
                                      double frequency_hz) {
    const double amp = db_to_amplitude(model.insertion_loss_at(frequency_hz));
    return rotation_matrix(RotationAngle(model.effective_rotation_deg(b))).scaled(amp);
}

inline JonesOperator surface_operator(const SurfaceModel& model, const BiasSetting& b) {
    return surface_operator(model, b, 2.44e9);
}

/// Incoming/outgoing wave amplitudes at a port.
struct PortWaves {
    double a{0.0};  // incoming
    double b{0.0};  // outgoing
};

/// Wave amplitudes from port voltage and current against reference impedance:
/// a = (V + Z0 I) / (2 sqrt(Z0)), b = (V - Z0 I) / (2 sqrt(Z0)).
inline PortWaves port_waves(double v, double i, double z0) {
    if (!(z0 > 0.0))
        throw std::invalid_argument("port_waves: reference impedance must be positive");
    const double denom = 2.0 * std::sqrt(z0);
    return {(v + z0 * i) / denom, (v - z0 * i) / denom};
}

/// Two-port scattering matrix with the forward transmission term resolved
/// into co- and cross-polarized components.
struct ScatteringMatrix {
    complex s11{0, 0}, s12{0, 0}, s21{0, 0}, s22{0, 0};
    complex s21xx{0, 0}, s21yx{0, 0}, s21xy{0, 0}, s21yy{0, 0};

    bool passive(double tol = 1e-9) const {
        const double lim = 1.0 + tol;
        for (const complex& s : {s11, s12, s21, s22, s21xx, s21yx, s21xy, s21yy})
            if (std::abs(s) > lim) return false;
        return true;
    }
};

enum class IncidentPolarization { x, y };

/// Power transmission efficiency for a given incident polarization:
/// |S21_co|^2 + |S21_cross|^2.
inline double transmission_efficiency(const ScatteringMatrix& s, IncidentPolarization pol) {
    if (!s.passive())
        throw std::invalid_argument("transmission_efficiency: matrix is not passive");
    return pol == IncidentPolarization::x ? std::norm(s.s21xx) + std::norm(s.s21yx)
                                          : std::norm(s.s21xy) + std::norm(s.s21yy);
}

/// Usable bandwidth of a transmission-line phase shifter whose substrate
/// thickness is lambda/m:
///   df = f0 * (2 - (m/pi) * acos[ Gamma/sqrt(1-Gamma^2) * 2 sqrt(Zi Zl)/|Zl - Zi| ])
/// where Gamma is the maximum tolerable reflection coefficient.
inline double phase_shifter_bandwidth(double f0, double gamma, double z_in, double z_load,
                                      double m) {
    if (!(f0 > 0.0)) throw std::invalid_argument("phase_shifter_bandwidth: f0 must be positive");
    if (!(gamma > 0.0 && gamma < 1.0))
        throw std::invalid_argument("phase_shifter_bandwidth: gamma must lie in (0, 1)");
    if (!(m > 0.0)) throw std::invalid_argument("phase_shifter_bandwidth: m must be positive");
    if (z_in == z_load)
        throw std::invalid_argument(
            "phase_shifter_bandwidth: degenerate case z_in == z_load (division by zero)");
    const double arg =
        gamma / std::sqrt(1.0 - gamma * gamma) * 2.0 * std::sqrt(z_in * z_load) /
        std::abs(z_load - z_in);
    if (arg > 1.0)
        throw std::domain_error(
            "phase_shifter_bandwidth: matching too easy, formula out of domain (acos arg > 1)");
    return f0 * (2.0 - m / pi * std::acos(arg));
}

/// Write a rotation table as CSV: header row carries the vx grid, the first
/// column the vy grid, the body rotation degrees.
inline void save_rotation_table_csv(const RotationTable& table, std::ostream& out) {
    out << "vy\\vx";
    for (double v : table.vx_grid) out << ',' << v;
    out << '\n';
    for (std::size_t iy = 0; iy < table.vy_grid.size(); ++iy) {
        out << table.vy_grid[iy];
        for (double v : table.theta[iy]) out << ',' << v;
        out << '\n';
    }
}

inline RotationTable load_rotation_table_csv(std::istream& in) {
    RotationTable table;
    std::string line;
    if (!std::getline(in, line))
        throw std::invalid_argument("rotation table CSV: empty file");
    auto split = [](const std::string& s) {
        std::vector<std::string> cells;
        std::stringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        return cells;
    };
    auto parse = [](const std::string& cell, const char* what) {
        try {
            std::size_t pos = 0;
            const double v = std::stod(cell, &pos);
            if (pos != cell.size()) throw std::invalid_argument(cell);
            return v;
        } catch (const std::exception&) {
            throw std::invalid_argument(std::string("rotation table CSV: bad ") + what + " '" +
                                        cell + "'");
        }
    };
    const auto header = split(line);
    if (header.size() < 3)
        throw std::invalid_argument("rotation table CSV: header needs at least two vx columns");
    for (std::size_t i = 1; i < header.size(); ++i)
        table.vx_grid.push_back(parse(header[i], "vx value"));
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != header.size())
            throw std::invalid_argument("rotation table CSV: ragged row '" + line + "'");
        table.vy_grid.push_back(parse(cells[0], "vy value"));
        std::vector<double> row;
        for (std::size_t i = 1; i < cells.size(); ++i)
            row.push_back(parse(cells[i], "rotation value"));
        table.theta.push_back(std::move(row));
    }
    table.validate();
    return table;
}

inline RotationTable load_rotation_table_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("rotation table CSV: cannot open '" + path + "'");
    return load_rotation_table_csv(in);
}

}  // namespace polarlink

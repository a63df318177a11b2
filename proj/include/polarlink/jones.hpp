#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace polarlink {

using complex = std::complex<double>;

inline constexpr double pi = std::numbers::pi;

inline double deg_to_rad(double deg) { return deg * pi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / pi; }

/// Plane-wave polarization state as a 2-component complex field vector.
struct PolarizationState {
    complex ex{0.0, 0.0};
    complex ey{0.0, 0.0};

    /// Linear polarization tilted by `angle_deg` from the x axis, unit intensity.
    static PolarizationState linear(double angle_deg) {
        const double r = deg_to_rad(angle_deg);
        return {complex(std::cos(r), 0.0), complex(std::sin(r), 0.0)};
    }
};

/// Angle in degrees, canonical range (-180, 180].
struct RotationAngle {
    double degrees{0.0};

    RotationAngle() = default;
    explicit RotationAngle(double deg) : degrees(deg) {}

    RotationAngle normalized() const {
        if (!std::isfinite(degrees))
            throw std::invalid_argument("RotationAngle: non-finite angle");
        double d = std::fmod(degrees, 360.0);
        if (d <= -180.0) d += 360.0;
        if (d > 180.0) d -= 360.0;
        return RotationAngle(d);
    }

    double radians() const { return deg_to_rad(degrees); }
};

/// 2x2 complex operator acting on PolarizationState, row-major storage.
struct JonesOperator {
    std::array<complex, 4> m{complex(1, 0), complex(0, 0), complex(0, 0), complex(1, 0)};

    JonesOperator() = default;
    JonesOperator(complex m00, complex m01, complex m10, complex m11) : m{m00, m01, m10, m11} {}

    static JonesOperator identity() { return {}; }

    static JonesOperator diagonal(complex d0, complex d1) {
        return {d0, complex(0, 0), complex(0, 0), d1};
    }

    complex at(int row, int col) const { return m[static_cast<std::size_t>(row * 2 + col)]; }

    JonesOperator transpose() const { return {m[0], m[2], m[1], m[3]}; }

    JonesOperator scaled(double s) const { return {m[0] * s, m[1] * s, m[2] * s, m[3] * s}; }

    bool finite() const {
        for (const auto& c : m)
            if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
        return true;
    }
};

inline JonesOperator operator*(const JonesOperator& a, const JonesOperator& b) {
    return {a.m[0] * b.m[0] + a.m[1] * b.m[2], a.m[0] * b.m[1] + a.m[1] * b.m[3],
            a.m[2] * b.m[0] + a.m[3] * b.m[2], a.m[2] * b.m[1] + a.m[3] * b.m[3]};
}

/// Total power carried by a polarization state: |ex|^2 + |ey|^2.
inline double intensity(const PolarizationState& j) {
    return std::norm(j.ex) + std::norm(j.ey);
}

/// Counterclockwise rotation by theta: [[cos, -sin], [sin, cos]].
inline JonesOperator rotation_matrix(const RotationAngle& theta) {
    if (!std::isfinite(theta.degrees))
        throw std::invalid_argument("rotation_matrix: non-finite angle");
    const double r = theta.radians();
    const double c = std::cos(r);
    const double s = std::sin(r);
    return {complex(c, 0), complex(-s, 0), complex(s, 0), complex(c, 0)};
}

/// Operator of a device physically rotated by theta: R(theta) * M * R(theta)^T.
inline JonesOperator rotate_operator(const JonesOperator& op, const RotationAngle& theta) {
    if (!op.finite())
        throw std::invalid_argument("rotate_operator: non-finite operator");
    const JonesOperator r = rotation_matrix(theta);
    return r * op * r.transpose();
}

inline PolarizationState apply(const JonesOperator& op, const PolarizationState& j) {
    return {op.m[0] * j.ex + op.m[1] * j.ey, op.m[2] * j.ex + op.m[3] * j.ey};
}

/// Product of a device stack; ops.front() meets the wave first, so the
/// result is ops[N-1] * ... * ops[1] * ops[0].
inline JonesOperator cascade(const std::vector<JonesOperator>& ops) {
    if (ops.empty())
        throw std::invalid_argument("cascade: empty operator list");
    JonesOperator out = ops.front();
    for (std::size_t i = 1; i < ops.size(); ++i) out = ops[i] * out;
    return out;
}

inline double frobenius_norm(const JonesOperator& a) {
    double s = 0.0;
    for (const auto& c : a.m) s += std::norm(c);
    return std::sqrt(s);
}

inline double frobenius_distance(const JonesOperator& a, const JonesOperator& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < 4; ++i) s += std::norm(a.m[i] - b.m[i]);
    return std::sqrt(s);
}

/// Frobenius distance between a and e^{j phi} b with phi fitted to minimize it.
/// Operators that differ only by a global phase give (numerically) zero.
inline double global_phase_distance(const JonesOperator& a, const JonesOperator& b) {
    complex overlap(0.0, 0.0);
    for (std::size_t i = 0; i < 4; ++i) overlap += std::conj(b.m[i]) * a.m[i];
    const double mag = std::abs(overlap);
    if (mag == 0.0) return frobenius_norm(a);  // orthogonal; no phase helps
    const complex phase = overlap / mag;
    double s = 0.0;
    for (std::size_t i = 0; i < 4; ++i) s += std::norm(a.m[i] - phase * b.m[i]);
    return std::sqrt(std::max(0.0, s));
}

/// Singular values of a 2x2 complex matrix, descending.
inline std::array<double, 2> singular_values(const JonesOperator& a) {
    // Eigenvalues of A^H A via trace/determinant of the 2x2 Gram matrix.
    const double g00 = std::norm(a.m[0]) + std::norm(a.m[2]);
    const double g11 = std::norm(a.m[1]) + std::norm(a.m[3]);
    const complex g01 = std::conj(a.m[0]) * a.m[1] + std::conj(a.m[2]) * a.m[3];
    const double tr = g00 + g11;
    const double det = g00 * g11 - std::norm(g01);
    const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
    const double hi = tr / 2.0 + disc;
    const double lo = std::max(0.0, tr / 2.0 - disc);
    return {std::sqrt(hi), std::sqrt(lo)};
}

}  // namespace polarlink

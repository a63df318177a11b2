#include <gtest/gtest.h>

#include <random>

#include "polarlink/jones.hpp"

using namespace polarlink;

namespace {

void expect_operator_near(const JonesOperator& a, const JonesOperator& b, double tol) {
    EXPECT_LT(frobenius_distance(a, b), tol);
}

}  // namespace

TEST(RotationAngle, NormalizationIsIdempotentAndCanonical) {
    EXPECT_DOUBLE_EQ(RotationAngle(540.0).normalized().degrees, 180.0);
    EXPECT_DOUBLE_EQ(RotationAngle(-180.0).normalized().degrees, 180.0);
    EXPECT_DOUBLE_EQ(RotationAngle(361.0).normalized().degrees, 1.0);
    EXPECT_DOUBLE_EQ(RotationAngle(-190.0).normalized().degrees, 170.0);
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> dist(-1000.0, 1000.0);
    for (int i = 0; i < 200; ++i) {
        const RotationAngle once = RotationAngle(dist(rng)).normalized();
        const RotationAngle twice = once.normalized();
        EXPECT_DOUBLE_EQ(once.degrees, twice.degrees);
        EXPECT_GT(once.degrees, -180.0);
        EXPECT_LE(once.degrees, 180.0);
    }
    EXPECT_THROW(RotationAngle(std::nan("")).normalized(), std::invalid_argument);
}

TEST(RotationMatrix, KnownAngles) {
    expect_operator_near(rotation_matrix(RotationAngle(0.0)), JonesOperator::identity(), 1e-15);
    expect_operator_near(rotation_matrix(RotationAngle(90.0)),
                         JonesOperator(complex(0, 0), complex(-1, 0), complex(1, 0), complex(0, 0)),
                         1e-12);
    const JonesOperator r30 = rotation_matrix(RotationAngle(30.0));
    EXPECT_NEAR(r30.at(0, 0).real(), 0.8660, 1e-4);
    EXPECT_NEAR(r30.at(0, 1).real(), -0.5, 1e-4);
    EXPECT_NEAR(r30.at(1, 0).real(), 0.5, 1e-4);
    EXPECT_NEAR(r30.at(1, 1).real(), 0.8660, 1e-4);
}

TEST(RotationMatrix, RejectsNonFinite) {
    EXPECT_THROW(rotation_matrix(RotationAngle(std::numeric_limits<double>::infinity())),
                 std::invalid_argument);
}

TEST(RotationMatrix, OrthogonalWithUnitDeterminant) {
    std::mt19937 rng(2);
    std::uniform_real_distribution<double> dist(-360.0, 360.0);
    for (int i = 0; i < 1000; ++i) {
        const JonesOperator r = rotation_matrix(RotationAngle(dist(rng)));
        expect_operator_near(r * r.transpose(), JonesOperator::identity(), 1e-12);
        const complex det = r.at(0, 0) * r.at(1, 1) - r.at(0, 1) * r.at(1, 0);
        EXPECT_NEAR(std::abs(det - complex(1, 0)), 0.0, 1e-12);
    }
}

TEST(RotationMatrix, GroupClosure) {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> dist(-180.0, 180.0);
    for (int i = 0; i < 500; ++i) {
        const double a = dist(rng), b = dist(rng);
        expect_operator_near(rotation_matrix(RotationAngle(a)) * rotation_matrix(RotationAngle(b)),
                             rotation_matrix(RotationAngle(a + b)), 1e-12);
    }
}

TEST(RotateOperator, IdentityCommutes) {
    for (double theta : {-123.0, 0.0, 17.5, 90.0}) {
        expect_operator_near(rotate_operator(JonesOperator::identity(), RotationAngle(theta)),
                             JonesOperator::identity(), 1e-12);
    }
}

TEST(RotateOperator, DiagonalMirrorQuarterTurn) {
    // R(90) diag(1,-1) R(90)^T = diag(-1,1), by hand multiplication.
    const JonesOperator mirror = JonesOperator::diagonal(complex(1, 0), complex(-1, 0));
    expect_operator_near(rotate_operator(mirror, RotationAngle(90.0)),
                         JonesOperator::diagonal(complex(-1, 0), complex(1, 0)), 1e-12);
}

TEST(Apply, KnownCases) {
    const PolarizationState x{complex(1, 0), complex(0, 0)};
    const PolarizationState same = apply(JonesOperator::identity(), x);
    EXPECT_EQ(same.ex, x.ex);
    EXPECT_EQ(same.ey, x.ey);

    const PolarizationState swapped = apply(rotation_matrix(RotationAngle(90.0)), x);
    EXPECT_NEAR(std::abs(swapped.ex), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(swapped.ey - complex(1, 0)), 0.0, 1e-12);

    const PolarizationState diag = apply(rotation_matrix(RotationAngle(45.0)), x);
    EXPECT_NEAR(diag.ex.real(), 0.7071, 1e-4);
    EXPECT_NEAR(diag.ey.real(), 0.7071, 1e-4);
}

TEST(Intensity, KnownCases) {
    EXPECT_DOUBLE_EQ(intensity({complex(1, 0), complex(0, 0)}), 1.0);
    EXPECT_DOUBLE_EQ(intensity({complex(0.6, 0), complex(0, 0.8)}), 1.0);
    EXPECT_DOUBLE_EQ(intensity({complex(0, 0), complex(0, 0)}), 0.0);
}

TEST(Intensity, PreservedByUnitaries) {
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> dist(-180.0, 180.0);
    std::uniform_real_distribution<double> amp(-2.0, 2.0);
    for (int i = 0; i < 500; ++i) {
        // Random rotation times a phase retarder: still unitary.
        const JonesOperator u = rotation_matrix(RotationAngle(dist(rng))) *
                                JonesOperator::diagonal(std::polar(1.0, dist(rng)),
                                                        std::polar(1.0, dist(rng)));
        const PolarizationState j{complex(amp(rng), amp(rng)), complex(amp(rng), amp(rng))};
        EXPECT_NEAR(intensity(apply(u, j)), intensity(j), 1e-12);
    }
}

TEST(Cascade, IdentityAndSingle) {
    expect_operator_near(cascade({JonesOperator::identity(), JonesOperator::identity()}),
                         JonesOperator::identity(), 1e-15);
    const JonesOperator a = rotation_matrix(RotationAngle(33.0));
    expect_operator_near(cascade({a}), a, 0.0 + 1e-15);
    EXPECT_THROW(cascade({}), std::invalid_argument);
}

TEST(Cascade, RotationComposition) {
    expect_operator_near(
        cascade({rotation_matrix(RotationAngle(10.0)), rotation_matrix(RotationAngle(20.0))}),
        rotation_matrix(RotationAngle(30.0)), 1e-9);
}

TEST(Cascade, AssociativeAndMatchesSequentialApplication) {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    auto random_op = [&] {
        return JonesOperator(complex(dist(rng), dist(rng)), complex(dist(rng), dist(rng)),
                             complex(dist(rng), dist(rng)), complex(dist(rng), dist(rng)));
    };
    for (int i = 0; i < 100; ++i) {
        const JonesOperator a = random_op(), b = random_op(), c = random_op();
        expect_operator_near(cascade({a, b, c}), cascade({cascade({a, b}), c}), 1e-12);

        const PolarizationState j{complex(dist(rng), dist(rng)), complex(dist(rng), dist(rng))};
        const PolarizationState via_cascade = apply(cascade({a, b, c}), j);
        const PolarizationState sequential = apply(c, apply(b, apply(a, j)));
        EXPECT_NEAR(std::abs(via_cascade.ex - sequential.ex), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(via_cascade.ey - sequential.ey), 0.0, 1e-12);
    }
}

TEST(GlobalPhaseDistance, IgnoresGlobalPhaseOnly) {
    const JonesOperator a = rotation_matrix(RotationAngle(25.0));
    const JonesOperator b(a.m[0] * std::polar(1.0, 1.234), a.m[1] * std::polar(1.0, 1.234),
                          a.m[2] * std::polar(1.0, 1.234), a.m[3] * std::polar(1.0, 1.234));
    EXPECT_LT(global_phase_distance(a, b), 1e-12);
    EXPECT_GT(global_phase_distance(a, rotation_matrix(RotationAngle(-25.0))), 0.1);
}

TEST(SingularValues, KnownCases) {
    const auto rot = singular_values(rotation_matrix(RotationAngle(61.0)));
    EXPECT_NEAR(rot[0], 1.0, 1e-12);
    EXPECT_NEAR(rot[1], 1.0, 1e-12);
    const auto diag = singular_values(JonesOperator::diagonal(complex(2, 0), complex(0, 0.5)));
    EXPECT_NEAR(diag[0], 2.0, 1e-12);
    EXPECT_NEAR(diag[1], 0.5, 1e-12);
}

// Rotation-level primitives: exponential/log, nu factors, right Jacobian,
// term-by-term actions and their first-order generators.

#include <gtest/gtest.h>

#include <random>

#include "tfg/lie.hpp"
#include "tfg/oracles.hpp"

using namespace tfg;
using lie::Rotation;

namespace {

std::mt19937 fixed_rng() { return std::mt19937(42); }

Vec random_vec(int n, std::mt19937& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    Vec v(n);
    for (int i = 0; i < n; ++i) v(i) = u(rng);
    return v;
}

Vec random_axis_angle(std::mt19937& rng, double angle) {
    Vec v = random_vec(3, rng);
    return v / v.norm() * angle;
}

Rotation random_rotation(int d, std::mt19937& rng, double max_angle = 2.5) {
    std::uniform_real_distribution<double> u(0.0, max_angle);
    if (d == 2) return lie::exp_rot((Vec(1) << u(rng) - max_angle / 2).finished());
    return lie::exp_rot(random_axis_angle(rng, u(rng)));
}

}  // namespace

TEST(Skew, AxisBasisAndProperties) {
    const Eigen::Vector3d e1 = Eigen::Vector3d::UnitX();
    const Eigen::Vector3d e2 = Eigen::Vector3d::UnitY();
    const Eigen::Vector3d e3 = Eigen::Vector3d::UnitZ();
    EXPECT_LT((lie::skew(e1) * e2 - e3).norm(), 1e-15);
    EXPECT_LT((lie::skew(e2) * e3 - e1).norm(), 1e-15);
    EXPECT_LT((lie::skew(e3) * e1 - e2).norm(), 1e-15);

    const Eigen::Vector3d b(0.3, -1.2, 2.0);
    EXPECT_LT((lie::skew(b) * b).norm(), 1e-15);
    EXPECT_LT((lie::skew(b).transpose() + lie::skew(b)).norm(), 1e-15);
}

TEST(ExpRot, ZeroIsIdentity) {
    const Rotation r = lie::exp_rot(Vec::Zero(3));
    EXPECT_LT((r.matrix() - Mat::Identity(3, 3)).norm(), 1e-15);
}

TEST(ExpRot, HalfTurnAboutX) {
    const Rotation r = lie::exp_rot((Vec(3) << M_PI, 0, 0).finished());
    Mat expected = Eigen::Vector3d(1, -1, -1).asDiagonal();
    EXPECT_LT((r.matrix() - expected).norm(), 1e-12);
}

TEST(ExpRot, MatchesSeriesOracle) {
    auto rng = fixed_rng();
    for (int t = 0; t < 50; ++t) {
        const Vec xi = random_axis_angle(rng, 0.7);
        const Mat series = oracles::expm_series(lie::skew(xi), 30);
        EXPECT_LT((lie::exp_rot(xi).matrix() - series).norm(), 1e-12);
    }
}

TEST(LogRot, IdentityAndRoundTrip) {
    EXPECT_LT(lie::log_rot(Rotation::identity(3)).norm(), 1e-15);
    const Vec xi = (Vec(3) << 0.1, 0.2, 0.3).finished();
    EXPECT_LT((lie::log_rot(lie::exp_rot(xi)) - xi).norm(), 1e-12);
}

TEST(LogRot, PlanarAngle) {
    const Vec xi = lie::log_rot(Rotation::planar(0.4));
    EXPECT_NEAR(xi(0), 0.4, 1e-15);
}

TEST(LogRot, ThrowsNearPi) {
    const Vec xi = (Vec(3) << M_PI - 1e-8, 0, 0).finished();
    EXPECT_THROW(lie::log_rot(lie::exp_rot(xi)), AngleNearPi);
}

TEST(ExpLog, RoundTripPrincipalDomain) {
    auto rng = fixed_rng();
    std::uniform_real_distribution<double> ua(0.0, 3.0);
    for (int t = 0; t < 500; ++t) {
        const Vec xi = random_axis_angle(rng, ua(rng));
        EXPECT_LT((lie::log_rot(lie::exp_rot(xi)) - xi).norm(), 1e-10);
    }
}

TEST(Adjoint, IdentityAndDefiningRelation) {
    EXPECT_LT((lie::adjoint(Rotation::identity(3)) - Mat::Identity(3, 3)).norm(), 1e-15);
    auto rng = fixed_rng();
    for (int t = 0; t < 100; ++t) {
        const Rotation r = random_rotation(3, rng);
        const Vec xi = random_axis_angle(rng, 0.8);
        const Mat lhs = (r * lie::exp_rot(xi) * r.inverse()).matrix();
        const Mat rhs = lie::exp_rot(Vec(lie::adjoint(r) * xi)).matrix();
        EXPECT_LT((lhs - rhs).norm(), 1e-12);
    }
    for (int t = 0; t < 20; ++t) {
        const Rotation r = random_rotation(2, rng);
        EXPECT_LT((lie::adjoint(r) - Mat::Identity(1, 1)).norm(), 1e-15);
    }
}

TEST(Nu, ZeroLimitIsIdentity) {
    EXPECT_LT((lie::nu(Vec::Zero(3), 3) - Mat::Identity(3, 3)).norm(), 1e-15);
    EXPECT_LT((lie::nu(Vec::Zero(1), 2) - Mat::Identity(2, 2)).norm(), 1e-15);
}

TEST(Nu, CoefficientsAtUnitAngle) {
    auto rng = fixed_rng();
    const Vec xi = random_axis_angle(rng, 1.0);
    const Mat s = lie::skew(xi);
    const Mat expected = Mat::Identity(3, 3) + (1.0 - std::cos(1.0)) * s +
                         (1.0 - std::sin(1.0)) * s * s;
    EXPECT_LT((lie::nu(xi, 3) - expected).norm(), 1e-14);
}

TEST(Nu, MatchesHomogeneousEmbeddingExponential) {
    auto rng = fixed_rng();
    std::uniform_real_distribution<double> ua(0.01, 2.5);
    for (int t = 0; t < 100; ++t) {
        const Vec xi = random_axis_angle(rng, ua(rng));
        const Vec v = random_vec(3, rng);
        Mat alg = Mat::Zero(4, 4);
        alg.block(0, 0, 3, 3) = lie::skew(xi);
        alg.block(0, 3, 3, 1) = v;
        const Mat exp = oracles::expm_series(alg, 40);
        EXPECT_LT((lie::nu(xi, 3) * v - exp.block(0, 3, 3, 1)).norm(), 1e-12);
    }
}

TEST(Nu, ClosedFormEqualsSeriesAcrossScales) {
    // nu(xi) = sum_k rep(xi)^k / (k+1)! including the signed planar case.
    auto rng = fixed_rng();
    for (double angle : {1e-9, 1e-7, 1e-5, 1e-3, 0.1, 1.0, 2.0, 3.0}) {
        for (int t = 0; t < 10; ++t) {
            for (int sign : {1, -1}) {
                const Vec xi3 = sign * random_axis_angle(rng, angle);
                Mat alg = Mat::Zero(4, 4);
                alg.block(0, 0, 3, 3) = lie::skew(xi3);
                const Vec v = random_vec(3, rng);
                alg.block(0, 3, 3, 1) = v;
                const Mat exp3 = oracles::expm_series(alg, 40);
                EXPECT_LT((lie::nu(xi3, 3) * v - exp3.block(0, 3, 3, 1)).norm(), 1e-10);

                const Vec xi2 = (Vec(1) << sign * angle).finished();
                Mat alg2 = Mat::Zero(3, 3);
                alg2(0, 1) = -xi2(0);
                alg2(1, 0) = xi2(0);
                const Vec v2 = random_vec(2, rng);
                alg2.block(0, 2, 2, 1) = v2;
                const Mat exp2 = oracles::expm_series(alg2, 40);
                EXPECT_LT((lie::nu(xi2, 2) * v2 - exp2.block(0, 2, 2, 1)).norm(), 1e-10);
            }
        }
    }
}

TEST(RightJacobian, IdentityAtZeroAndTaylorAgreement) {
    EXPECT_LT((lie::right_jacobian(Eigen::Vector3d::Zero()) - Mat::Identity(3, 3)).norm(),
              1e-15);
    const Eigen::Vector3d mu(1e-8, -2e-8, 5e-9);
    const Mat taylor = Mat::Identity(3, 3) - 0.5 * lie::skew(mu) +
                       (1.0 / 6.0) * lie::skew(mu) * lie::skew(mu);
    EXPECT_LT((lie::right_jacobian(mu) - taylor).norm(), 1e-15);
}

TEST(RightJacobian, FiniteDifferenceDefiningRelation) {
    const Eigen::Vector3d alpha(0.3, -0.2, 0.5);
    auto rng = fixed_rng();
    for (int t = 0; t < 20; ++t) {
        const Vec beta = random_vec(3, rng, 1e-5);
        const Mat lhs = lie::exp_rot(Vec(alpha + beta)).matrix();
        const Mat rhs = (lie::exp_rot(Vec(alpha)) *
                         lie::exp_rot(Vec(lie::right_jacobian(alpha) * beta)))
                            .matrix();
        EXPECT_LT((lhs - rhs).norm(), 1e-9);
    }
}

TEST(Act, IdentityCompositionAndSingleVector) {
    auto rng = fixed_rng();
    const Vec w = random_vec(9, rng);
    EXPECT_LT((lie::act(Rotation::identity(3), w) - w).norm(), 1e-15);
    for (int t = 0; t < 100; ++t) {
        const Rotation r1 = random_rotation(3, rng);
        const Rotation r2 = random_rotation(3, rng);
        const Vec v = random_vec(12, rng);
        EXPECT_LT((lie::act(r1 * r2, v) - lie::act(r1, lie::act(r2, v))).norm(), 1e-12);
    }
    const Vec single = random_vec(3, rng);
    const Rotation r = random_rotation(3, rng);
    EXPECT_LT((lie::act(r, single) - r.matrix() * single).norm(), 1e-15);
}

TEST(RepMatrix, MatchesActAndIdentity) {
    auto rng = fixed_rng();
    const Rotation r = random_rotation(3, rng);
    EXPECT_LT((lie::rep_matrix(r, 1) - r.matrix()).norm(), 1e-15);
    EXPECT_LT((lie::rep_matrix(Rotation::identity(3), 4) - Mat::Identity(12, 12)).norm(),
              1e-15);
    for (int t = 0; t < 50; ++t) {
        const Rotation rr = random_rotation(3, rng);
        const Vec w = random_vec(12, rng);
        EXPECT_LT((lie::rep_matrix(rr, 4) * w - lie::act(rr, w)).norm(), 1e-13);
    }
}

TEST(DgOperator, ZeroSingleVectorAndStackedFiniteDifference) {
    EXPECT_LT(lie::dg_operator(Vec::Zero(6), 3).norm(), 1e-15);

    auto rng = fixed_rng();
    const Vec x = random_vec(3, rng);
    EXPECT_LT((lie::dg_operator(x, 3) - lie::skew(x)).norm(), 1e-15);

    // act(exp(xi), w) = w - dg(w) xi + O(xi^2), checked with a small step.
    for (int d : {2, 3}) {
        const int dp = d == 2 ? 1 : 3;
        const Vec w = random_vec(2 * d, rng);
        const Mat dg = lie::dg_operator(w, d);
        for (int t = 0; t < 20; ++t) {
            const Vec xi = random_vec(dp, rng, 1e-6);
            const Vec lhs = lie::act(lie::exp_rot(xi), w);
            EXPECT_LT((lhs - (w - dg * xi)).norm(), 1e-8);
        }
    }
}

TEST(DgOperator, MatchesCentralDifferences) {
    auto rng = fixed_rng();
    for (int d : {2, 3}) {
        const int dp = d == 2 ? 1 : 3;
        const Vec w = random_vec(3 * d, rng);
        const auto f = [&](const Vec& xi) -> Vec { return -lie::act(lie::exp_rot(xi), w); };
        const Mat fd = oracles::central_difference(f, Vec::Zero(dp), 1e-6);
        const Mat dg = lie::dg_operator(w, d);
        EXPECT_LT((fd - dg).norm() / dg.norm(), 1e-5);
    }
}

TEST(RotationGroup, AxiomsOnRandomTriples) {
    auto rng = fixed_rng();
    for (int d : {2, 3}) {
        for (int t = 0; t < 1000; ++t) {
            const Rotation a = random_rotation(d, rng);
            const Rotation b = random_rotation(d, rng);
            const Rotation c = random_rotation(d, rng);
            const Mat assoc = ((a * b) * c).matrix() - (a * (b * c)).matrix();
            EXPECT_LT(assoc.norm(), 1e-12);
            EXPECT_LT(((a * a.inverse()).matrix() - Mat::Identity(d, d)).norm(), 1e-12);
            const Mat closure = (a * b).matrix();
            EXPECT_LT((closure.transpose() * closure - Mat::Identity(d, d)).norm(), 1e-12);
            EXPECT_NEAR(closure.determinant(), 1.0, 1e-12);
        }
    }
}

TEST(RotationGroup, ActionAxioms) {
    auto rng = fixed_rng();
    for (int d : {2, 3}) {
        for (int t = 0; t < 200; ++t) {
            const Vec w = random_vec(2 * d, rng);
            EXPECT_LT((lie::act(Rotation::identity(d), w) - w).norm(), 1e-15);
            const Rotation r1 = random_rotation(d, rng);
            const Rotation r2 = random_rotation(d, rng);
            EXPECT_LT((lie::act(r1 * r2, w) - lie::act(r1, lie::act(r2, w))).norm(), 1e-12);
        }
    }
}

TEST(Rotation, ConstructorRejectsNonRotation) {
    Mat bad = Mat::Identity(3, 3);
    bad(0, 0) = 1.5;
    EXPECT_THROW(Rotation{bad}, ShapeMismatch);
    Mat reflection = Mat::Identity(3, 3);
    reflection(2, 2) = -1.0;
    EXPECT_THROW(Rotation{reflection}, ShapeMismatch);
}

TEST(ProjectRotation, RecoversNearbyRotation) {
    auto rng = fixed_rng();
    const Rotation r = random_rotation(3, rng);
    Mat drifted = r.matrix();
    drifted(0, 1) += 1e-8;
    const Rotation projected = lie::project_rotation(drifted);
    EXPECT_LT((projected.matrix() - r.matrix()).norm(), 1e-7);
    const Mat ortho = projected.matrix().transpose() * projected.matrix();
    EXPECT_LT((ortho - Mat::Identity(3, 3)).norm(), 1e-14);
}

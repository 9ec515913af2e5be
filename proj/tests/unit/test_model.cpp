#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "phtori/errors.hpp"
#include "phtori/model.hpp"
#include "support/rtbp_fixture.hpp"

using namespace phtori;

namespace {

Vec random_point(std::mt19937_64& rng) {
    // Away from both primaries.
    std::uniform_real_distribution<double> u(-0.3, 0.3);
    Vec z(6);
    for (int k = 0; k < 6; ++k) z[k] = u(rng);
    z[0] += -0.5;
    return z;
}

double quintic(double mu, double g) {
    return std::pow(g, 5) - (3 - mu) * std::pow(g, 4) + (3 - 2 * mu) * std::pow(g, 3) - mu * g * g + 2 * mu * g - mu;
}

}  // namespace

TEST(SymplecticStructure, StandardIdentities) {
    SymplecticStructure s(3);
    const Mat om = s.omega(), j = s.almost_complex(), g = s.metric();
    const Mat id = Mat::Identity(6, 6);
    EXPECT_LT((om + om.transpose()).norm(), 1e-15);
    EXPECT_LT((om * s.omega_inverse() - id).norm(), 1e-15);
    EXPECT_LT((j * j + id).norm(), 1e-15);
    EXPECT_LT((j.transpose() * om * j - om).norm(), 1e-15);
    EXPECT_LT((g - (-om * j)).norm(), 1e-15);
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<Mat>(g).eigenvalues().minCoeff(), 0);
    const Mat da = s.action_jacobian();
    EXPECT_EQ(da.transpose() - da, om);
}

TEST(SymplecticStructure, ActionApplyMatchesForm) {
    SymplecticStructure s(3);
    Vec z(6), v(6);
    z << 0.1, -0.2, 0.3, 0.4, -0.5, 0.6;
    v << 1, 2, 3, 4, 5, 6;
    const std::span<const double> zs(z.data(), 6), vs(v.data(), 6);
    EXPECT_NEAR(s.action_apply(zs, vs), s.action_form(zs).dot(v), 1e-15);
}

TEST(Rtbp, L1MatchesPublishedValue) {
    const L1Point l1 = find_L1(RtbpParams{});
    EXPECT_NEAR(l1.x, -0.83692, 1e-5);
    EXPECT_LT(std::abs(quintic(RtbpParams{}.mu, l1.gamma)), 1e-14);
    EXPECT_DOUBLE_EQ(l1.x, RtbpParams{}.mu - 1 + l1.gamma);
}

TEST(Rtbp, L1AgreesWithBisection) {
    for (double mu : {1e-6, 1e-3, 0.1, 0.3, 0.49, 0.4999999}) {
        double lo = 0, hi = 1;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (quintic(mu, mid) < 0 ? lo : hi) = mid;
        }
        RtbpParams p;
        p.mu = mu;
        EXPECT_NEAR(find_L1(p).gamma, 0.5 * (lo + hi), 1e-13) << "mu " << mu;
    }
}

TEST(Rtbp, RejectsBadMassRatio) {
    RtbpParams p;
    p.mu = 0.5;
    EXPECT_THROW(find_L1(p), ConfigError);
}

TEST(Rtbp, EnergyAtL1IsFrozen) {
    const RtbpModel model;
    const Vec z = find_L1(model.params()).state();
    // Regression baseline from our own evaluation.
    EXPECT_NEAR(model.hamiltonian(z), -1.59417055887462, 1e-13);
}

TEST(Rtbp, KeplerLimit) {
    RtbpParams p;
    p.mu = 1e-14;
    const RtbpModel model(p);
    for (double r : {0.5, 2.0}) {
        for (double phi : {0.3, 2.0}) {
            Vec z(6);
            const double v = std::sqrt(1 / r);
            z << r * std::cos(phi), r * std::sin(phi), 0, -v * std::sin(phi), v * std::cos(phi), 0;
            EXPECT_NEAR(model.hamiltonian(z), -1 / (2 * r) - std::sqrt(r), 1e-12);
        }
    }
}

TEST(Rtbp, ReflectionSymmetry) {
    const RtbpModel model;
    std::mt19937_64 rng(3);
    for (int t = 0; t < 20; ++t) {
        Vec z = random_point(rng), zr = z;
        zr[1] = -z[1];
        zr[3] = -z[3];
        EXPECT_NEAR(model.hamiltonian(z), model.hamiltonian(zr), 1e-14);
    }
}

TEST(Rtbp, SingularityGuard) {
    const RtbpModel model;
    Vec z = Vec::Zero(6);
    z[0] = model.mu();
    EXPECT_THROW(model.hamiltonian(z), SingularityError);
    Vec out(6);
    EXPECT_THROW(model.vector_field(z), SingularityError);
}

TEST(Rtbp, VectorFieldIsSymplecticGradient) {
    const RtbpModel model;
    std::mt19937_64 rng(4);
    const Mat oi = model.structure().omega_inverse();
    for (int t = 0; t < 20; ++t) {
        const Vec z = random_point(rng);
        const Vec x = model.vector_field(z), g = model.gradient(z);
        EXPECT_LT((x - oi * g).norm(), 1e-13 * x.norm());
        EXPECT_LT(std::abs(g.dot(x)), 1e-12 * (1 + g.norm() * x.norm()));
    }
}

TEST(Rtbp, GradientMatchesFiniteDifferences) {
    const RtbpModel model;
    std::mt19937_64 rng(5);
    const Vec z = random_point(rng);
    const Vec g = model.gradient(z);
    const double h = 1e-6;
    for (int k = 0; k < 6; ++k) {
        Vec zp = z, zm = z;
        zp[k] += h;
        zm[k] -= h;
        EXPECT_NEAR(g[k], (model.hamiltonian(zp) - model.hamiltonian(zm)) / (2 * h), 1e-8);
    }
}

TEST(Rtbp, JacobianMatchesFiniteDifferences) {
    const RtbpModel model;
    std::mt19937_64 rng(6);
    for (int t = 0; t < 5; ++t) {
        const Vec z = random_point(rng);
        const Mat a = model.jacobian(z);
        const double h = 1e-5;
        Mat fd(6, 6);
        for (int k = 0; k < 6; ++k) {
            Vec zp = z, zm = z;
            zp[k] += h;
            zm[k] -= h;
            fd.col(k) = (model.vector_field(zp) - model.vector_field(zm)) / (2 * h);
        }
        EXPECT_LT((a - fd).cwiseAbs().maxCoeff(), 1e-6);
        const Mat om = model.structure().omega();
        const Mat sym = om * a;
        EXPECT_LT((sym - sym.transpose()).cwiseAbs().maxCoeff(), 1e-12 * (1 + a.norm()));
    }
}

TEST(Rtbp, HessianActionSymmetricAndMatchesFiniteDifferences) {
    const RtbpModel model;
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g;
    for (int t = 0; t < 5; ++t) {
        const Vec z = random_point(rng);
        Vec u(6), v(6);
        for (int k = 0; k < 6; ++k) {
            u[k] = g(rng);
            v[k] = g(rng);
        }
        const Vec huv = model.hessian_action(z, u, v), hvu = model.hessian_action(z, v, u);
        EXPECT_EQ(huv, hvu);
        const double h = 1e-5;
        const Vec fd = (model.jacobian(Vec(z + h * u)) - model.jacobian(Vec(z - h * u))) * v / (2 * h);
        EXPECT_LT((huv - fd).cwiseAbs().maxCoeff(), 1e-6 * (1 + huv.norm()));
    }
}

TEST(Rtbp, L1IsEquilibrium) {
    const RtbpModel model;
    EXPECT_LT(model.vector_field(find_L1(model.params()).state()).norm(), 1e-14);
}

TEST(Rtbp, LinearSpectrumAtL1) {
    const RtbpModel model;
    const Vec z = find_L1(model.params()).state();
    const LinearSpectrum sp = linear_spectrum_at(model, z);
    EXPECT_NEAR(sp.omega_p, 0.371529, 1e-6);
    EXPECT_NEAR(sp.omega_v, 0.361096, 1e-6);
    EXPECT_NEAR(sp.lambda, 2.932056, 1e-6);

    const Mat a = model.jacobian(z);
    const Eigen::MatrixXcd ac = a.cast<cplx>();
    const double tp = 2 * std::numbers::pi;
    EXPECT_LT((ac * sp.planar_vector - cplx(0, tp * sp.omega_p) * sp.planar_vector).norm(), 1e-12);
    EXPECT_LT((ac * sp.vertical_vector - cplx(0, tp * sp.omega_v) * sp.vertical_vector).norm(), 1e-12);
    EXPECT_LT((a * sp.unstable_vector - sp.lambda * sp.unstable_vector).norm(), 1e-12);
    EXPECT_LT((a * sp.stable_vector + sp.lambda * sp.stable_vector).norm(), 1e-12);
    // Vertical pair lives in (x3, p3).
    for (int k : {0, 1, 3, 4}) EXPECT_LT(std::abs(sp.vertical_vector[k]), 1e-12);

    Eigen::EigenSolver<Mat> es(a);
    const auto ev = es.eigenvalues();
    for (int i = 0; i < 6; ++i) {
        double best = 1e300;
        for (int j = 0; j < 6; ++j) best = std::min(best, std::abs(ev[i] + ev[j]));
        EXPECT_LT(best, 1e-12);
    }
}

#include <gtest/gtest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include "phtori/errors.hpp"
#include "phtori/flow.hpp"
#include "support/rtbp_fixture.hpp"

using namespace phtori;
using phtori::testing::earth_moon;

namespace {

// A bounded orbit: the vertical Lyapunov orbit's initial condition, slightly perturbed.
Vec orbit_point() {
    Vec z = phtori::testing::vertical_orbit().x0;
    z[1] += 1e-3;
    return z;
}

}  // namespace

TEST(Flow, EquilibriumStaysPut) {
    const Vec l1 = find_L1(earth_moon().params()).state();
    const auto r = flow_point(earth_moon(), l1, 1.0);
    EXPECT_LT((r.endpoint - l1).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Flow, EnergyConservedAndReversible) {
    const Vec z = orbit_point();
    const auto r = flow_point(earth_moon(), z, 2.0);
    EXPECT_LT(std::abs(earth_moon().hamiltonian(r.endpoint) - earth_moon().hamiltonian(z)), 1e-11);
    const auto back = flow_point(earth_moon(), r.endpoint, -2.0);
    EXPECT_LT((back.endpoint - z).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_GT(r.stats.steps, 0);
}

TEST(Flow, JacobianAtTimeZeroIsIdentity) {
    const auto r = flow_with_jacobian(earth_moon(), orbit_point(), 0.0);
    EXPECT_EQ(*r.jacobian, Mat::Identity(6, 6));
}

TEST(Flow, JacobianAtL1IsMatrixExponential) {
    const Vec l1 = find_L1(earth_moon().params()).state();
    const double t = 0.8;
    const Mat expected = (t * earth_moon().jacobian(l1)).exp();
    const auto r = flow_with_jacobian(earth_moon(), l1, t);
    EXPECT_LT((*r.jacobian - expected).cwiseAbs().maxCoeff(), 1e-10 * expected.cwiseAbs().maxCoeff());
}

TEST(Flow, JacobianSymplecticAndTransportsField) {
    const Vec z = orbit_point();
    const auto r = flow_with_jacobian(earth_moon(), z, 1.5);
    const Mat om = earth_moon().structure().omega();
    const Mat& d = *r.jacobian;
    EXPECT_LT((d.transpose() * om * d - om).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((d * earth_moon().vector_field(z) - earth_moon().vector_field(r.endpoint)).norm(), 1e-9);

    Mat v(6, 2);
    v.setRandom();
    const auto a = flow_applied(earth_moon(), z, 1.5, v);
    EXPECT_LT((*a.applied - d * v).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Flow, SecondActionProperties) {
    const Vec z = orbit_point();
    Vec u(6), v(6);
    u << 0.3, -0.1, 0.2, 0.5, 0.1, -0.4;
    v << -0.2, 0.4, 0.1, 0.3, -0.5, 0.2;
    const double t = 1.0;
    const auto zero = flow_second_action(earth_moon(), z, t, Vec::Zero(6), v);
    EXPECT_LT(zero.second_action->cwiseAbs().maxCoeff(), 1e-15);

    const auto uv = flow_second_action(earth_moon(), z, t, u, v);
    const auto vu = flow_second_action(earth_moon(), z, t, v, u);
    EXPECT_LT((*uv.second_action - *vu.second_action).cwiseAbs().maxCoeff(), 1e-10);

    // Central differences of D phi; |D^2 phi| is O(100) here, so the check is relative.
    const Vec sa = uv.second_action->col(0);
    double prev = 0;
    for (double e : {1e-4, 1e-5}) {
        const Mat jp = *flow_with_jacobian(earth_moon(), Vec(z + e * u), t).jacobian;
        const Mat jm = *flow_with_jacobian(earth_moon(), Vec(z - e * u), t).jacobian;
        const double diff = (sa - (jp - jm) * v / (2 * e)).cwiseAbs().maxCoeff();
        EXPECT_LT(diff, 1e-4 * sa.norm() * (e / 1e-4) * (e / 1e-4) + 1e-9);
        if (prev > 0) EXPECT_GT(prev / diff, 50.0);
        prev = diff;
    }
}

TEST(Flow, GridMatchesPointFlowsForAnyWorkerCount) {
    const int n = 64;
    const Vec l1 = find_L1(earth_moon().params()).state();
    Mat pts(n, 6);
    for (int j = 0; j < n; ++j) {
        const double th = 2 * std::numbers::pi * j / n;
        pts.row(j) = l1.transpose();
        pts(j, 0) += 1e-3 * std::cos(th);
        pts(j, 2) += 2e-3 * std::sin(th);
    }
    GridFlowRequest req;
    for (int j = 0; j < n; ++j) req.columns.push_back(Mat::Identity(6, 2));
    req.pairs = {{0, 1}};
    IntegratorConfig serial;
    serial.workers = 1;
    IntegratorConfig parallel;
    parallel.workers = 4;
    const auto a = flow_grid(earth_moon(), pts, 1.0, req, serial);
    const auto b = flow_grid(earth_moon(), pts, 1.0, req, parallel);
    EXPECT_EQ(a.endpoints, b.endpoints);
    for (int j = 0; j < n; ++j) {
        EXPECT_EQ(a.applied[j], b.applied[j]);
        EXPECT_EQ(a.second_action[j], b.second_action[j]);
    }
    double drift = 0;
    const auto plain = flow_grid(earth_moon(), pts, 1.0, {}, parallel);
    for (int j = 0; j < n; ++j) {
        const Vec z = pts.row(j).transpose();
        EXPECT_EQ(Vec(plain.endpoints.row(j).transpose()), flow_point(earth_moon(), z, 1.0).endpoint);
        const auto pv = flow_variational(earth_moon(), z, 1.0, Mat::Identity(6, 2), {{0, 1}});
        EXPECT_EQ(Vec(a.endpoints.row(j).transpose()), pv.endpoint);
        EXPECT_EQ(a.applied[j], *pv.applied);
        drift = std::max(drift, std::abs(earth_moon().hamiltonian(Vec(a.endpoints.row(j).transpose())) -
                                         earth_moon().hamiltonian(z)));
    }
    EXPECT_LT(drift, 1e-11);

    Mat same(8, 6);
    for (int j = 0; j < 8; ++j) same.row(j) = l1.transpose();
    const auto c = flow_grid(earth_moon(), same, 1.0);
    for (int j = 1; j < 8; ++j) EXPECT_EQ(c.endpoints.row(j), c.endpoints.row(0));
}

TEST(Flow, StepBudgetExceeded) {
    IntegratorConfig cfg;
    cfg.max_steps = 3;
    EXPECT_THROW(flow_point(earth_moon(), orbit_point(), 3.0, cfg), FlowError);
}

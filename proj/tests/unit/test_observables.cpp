#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "phtori/observables.hpp"
#include "support/rtbp_fixture.hpp"

using namespace phtori;
using phtori::testing::earth_moon;

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

TorusState shifted(const TorusState& s, double shift) {
    TorusState r = s;
    for (int i = 0; i < s.m; ++i) {
        r.K[i] = rotate(s.K[i], shift);
        r.W[i] = rotate(s.W[i], shift);
    }
    return r;
}

// Spectral derivative along one grid axis of a (n1 x n2) sample array, column c of the surface.
Mat surface_derivative(const Surface& s, int axis) {
    Mat d(s.points.rows(), s.points.cols());
    const int len = axis == 0 ? s.n1 : s.n2, count = axis == 0 ? s.n2 : s.n1;
    for (int line = 0; line < count; ++line)
        for (int c = 0; c < s.points.cols(); ++c) {
            std::vector<double> f(len);
            auto row = [&](int k) { return axis == 0 ? line * s.n1 + k : k * s.n1 + line; };
            for (int k = 0; k < len; ++k) f[k] = s.points(row(k), c);
            const auto df = derivative(PeriodicFunction::from_samples(f));
            for (int k = 0; k < len; ++k) d(row(k), c) = df[k];
        }
    return d;
}

double surface_calabi(const Surface& s, const Mat& d) {
    const SymplecticStructure st(3);
    double acc = 0;
    for (int r = 0; r < s.points.rows(); ++r) {
        const Vec z = s.points.row(r).transpose(), v = d.row(r).transpose();
        acc += st.action_apply(std::span<const double>(z.data(), 6), std::span<const double>(v.data(), 6));
    }
    return acc / s.points.rows();
}

}  // namespace

TEST(Calabi, PointCurve) {
    Mat k(16, 6);
    for (int j = 0; j < 16; ++j) k.row(j) << 0.1, 0.2, 0.3, 0.4, 0.5, 0.6;
    EXPECT_NEAR(calabi(SymplecticStructure(3), CurveMap::from_samples(k)), 0.0, 1e-16);
}

TEST(Calabi, PlanarCircle) {
    const double r = 0.7;
    Mat k(32, 6);
    for (int j = 0; j < 32; ++j) {
        const double th = kTwoPi * j / 32;
        k.row(j) << r * std::cos(th), r * std::sin(th), 0, -r * std::sin(th), r * std::cos(th), 0;
    }
    EXPECT_NEAR(calabi(SymplecticStructure(3), CurveMap::from_samples(k)), kTwoPi * r * r, 1e-13);
}

TEST(Calabi, FlowInvariance) {
    const TorusState& s = phtori::testing::narrow_torus();
    const CurveMap& k = s.K[0];
    const GridFlowResult f = flow_grid(earth_moon(), k.samples(), 0.7);
    const double c0 = calabi(earth_moon().structure(), k);
    EXPECT_LT(std::abs(calabi(earth_moon().structure(), CurveMap::from_samples(f.endpoints)) - c0), 1e-10);
}

TEST(Calabi, SurfaceQuadratureAndUnimodularLaw) {
    const TorusState& s = phtori::testing::narrow_torus();
    const Surface surf = globalize_surface(earth_moon(), s, 32, 64);
    const Mat d1 = surface_derivative(surf, 0), d2 = surface_derivative(surf, 1);
    const double c1 = surface_calabi(surf, d1), c2 = surface_calabi(surf, d2);
    const CalabiPair cp = calabi_2d(earth_moon(), s, 256);
    EXPECT_NEAR(c1, cp.generator, 1e-9);
    EXPECT_NEAR(c2, cp.companion, 1e-8);
    // K o A with A = [[1, 1], [0, 1]]: derivatives combine as d1 and d1 + d2.
    EXPECT_NEAR(surface_calabi(surf, Mat(d1 + d2)), c1 + c2, 1e-12);
}

TEST(Calabi, VerticalGeneratorIdentities) {
    const TorusState& s = phtori::testing::narrow_torus();
    const CalabiPair cp = calabi_2d(earth_moon(), s, 256);
    EXPECT_DOUBLE_EQ(cp.c1, cp.generator);
    EXPECT_NEAR(cp.c2, -cp.generator + cp.companion, 1e-15);
}

TEST(Distances, Basics) {
    Vec u(3);
    u << 1, 2, 3;
    EXPECT_NEAR(subspace_distance(u, u), 0.0, 1e-15);
    Mat b(3, 1);
    b << 0, 0, 1;
    Vec e(3);
    e << 1, 0, 0;
    EXPECT_NEAR(subspace_distance(e, b), 1.0, 1e-15);
}

TEST(Distances, PhaseInvariantOnGridShifts) {
    const TorusState& s = phtori::testing::narrow_torus();
    const BundleDistances a = bundle_distances(s, build_frame(earth_moon(), s));
    const TorusState r = shifted(s, 3.0 / s.N());
    const BundleDistances b = bundle_distances(r, build_frame(earth_moon(), r));
    EXPECT_NEAR(a.stable_unstable, b.stable_unstable, 1e-10);
    EXPECT_NEAR(a.stable_center, b.stable_center, 1e-10);
    EXPECT_NEAR(a.unstable_center, b.unstable_center, 1e-10);
    EXPECT_NEAR(a.tangent_field, b.tangent_field, 1e-10);
    EXPECT_GT(a.stable_unstable, 0.49);
    EXPECT_GT(a.stable_center, 0.06);
    EXPECT_GT(a.unstable_center, 0.06);
}

TEST(Frequencies, Identities) {
    const TorusState& s = phtori::testing::narrow_torus();
    const Frequencies f = natural_frequencies(s);
    EXPECT_DOUBLE_EQ(f.nu_v, s.omega);
    EXPECT_DOUBLE_EQ(f.omega_v, 1 / s.T);
    EXPECT_NEAR((1 + f.nu_v) * (1 - f.nu_p), 1.0, 1e-15);
    EXPECT_NEAR(1 / (1 - f.nu_p) - 1, f.nu_v, 1e-15);
    EXPECT_NEAR(f.nu_p, 1 - f.omega_v / f.omega_p, 1e-15);
}

TEST(Surface, SlicesEnergyAndExport) {
    const TorusState& s = phtori::testing::narrow_torus();
    const int n1 = s.N(), n2 = 64;
    const Surface surf = globalize_surface(earth_moon(), s, n1, n2);
    for (int i = 0; i < s.m; ++i) {
        const int i2 = i * n2 / s.m;
        for (int j = 0; j < n1; ++j)
            EXPECT_LT((Vec(surf.points.row(i2 * n1 + j).transpose()) - s.K[i].point(j)).cwiseAbs().maxCoeff(), 1e-13);
    }
    double drift = 0;
    for (int r = 0; r < surf.points.rows(); ++r)
        drift = std::max(drift, std::abs(earth_moon().hamiltonian(Vec(surf.points.row(r).transpose())) - s.h));
    EXPECT_LT(drift, 1e-9);

    // Seam: flowing the last column to theta2 = 1 lands back on K_0.
    const double last = double(n2 - 1) / n2;
    Mat col(n1, 6);
    for (int j = 0; j < n1; ++j) col.row(j) = surf.points.row((n2 - 1) * n1 + j);
    const GridFlowResult f = flow_grid(earth_moon(), col, (1 - last) * s.T);
    const CurveMap back = rotate(CurveMap::from_samples(f.endpoints), -(1 - last) * s.omega);
    EXPECT_LT((back.samples() - s.K[0].samples()).cwiseAbs().maxCoeff(), 1e-8);

    std::ostringstream os;
    write_surface(os, s, surf);
    const std::string out = os.str();
    EXPECT_NE(out.find("[generator theta2=0]"), std::string::npos);
    EXPECT_NE(out.find("[generator theta1=0]"), std::string::npos);
}

TEST(Observables, Record) {
    const TorusState& s = phtori::testing::narrow_torus();
    ObservableOptions opt;
    opt.n2 = 64;
    const ObservableRecord r = compute_observables(earth_moon(), s, opt);
    EXPECT_NEAR(r.unstable_multiplier, std::pow(s.lambda, -s.m), 1e-9 * r.unstable_multiplier);
    EXPECT_NEAR(r.floquet_exponent, std::log(r.unstable_multiplier) / s.T, 1e-14);
    EXPECT_GE(r.r1, 0);
    EXPECT_GE(r.r2, 0);
    EXPECT_NEAR(r.r1, std::sqrt(std::abs(r.c1) / std::numbers::pi), 1e-15);
    for (double d : {r.distances.stable_unstable, r.distances.stable_center, r.distances.unstable_center,
                     r.distances.tangent_field}) {
        EXPECT_GE(d, 0);
        EXPECT_LE(d, 1);
    }
    EXPECT_EQ(r.N, s.N());
    EXPECT_EQ(r.m, s.m);
}

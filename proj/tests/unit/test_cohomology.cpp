#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "phtori/cohomology.hpp"
#include "phtori/errors.hpp"
#include "support/oracles.hpp"

using namespace phtori;
using phtori::testing::kTwoPi;

namespace {

const double kGolden = (std::sqrt(5.0) - 1) / 2;

Eigen::VectorXd vec(const PeriodicFunction& f) {
    return Eigen::Map<const Eigen::VectorXd>(f.samples().data(), f.size());
}

PeriodicFunction random_band(int n, int band, std::mt19937_64& rng) {
    return PeriodicFunction::from_samples(phtori::testing::band_limited(n, band, rng));
}

}  // namespace

TEST(Cohomology, ZeroRightHandSide) {
    const auto s = solve_small_divisor(PeriodicFunction(16), kGolden);
    EXPECT_EQ(s.avg, 0.0);
    for (double x : s.xi.samples()) EXPECT_EQ(x, 0.0);
}

TEST(Cohomology, SingleHarmonicClosedForm) {
    std::vector<double> f(16);
    for (int j = 0; j < 16; ++j) f[j] = std::cos(kTwoPi * j / 16);
    const auto s = solve_small_divisor(PeriodicFunction::from_samples(f), kGolden);
    const cplx expect = 0.5 / (1.0 - std::polar(1.0, kTwoPi * kGolden));
    EXPECT_LT(std::abs(s.xi.coeffs()[1] - expect), 1e-15);
    EXPECT_LT(std::abs(s.xi.coeffs()[0]), 1e-16);
}

TEST(Cohomology, SmallDivisorResidual) {
    std::mt19937_64 rng(21);
    const auto eta = random_band(64, 12, rng);
    const auto s = solve_small_divisor(eta, kGolden);
    EXPECT_NEAR(s.avg, average(eta), 1e-15);
    EXPECT_LT(std::abs(average(s.xi)), 1e-16);
    const auto res = s.xi - rotate(s.xi, kGolden) - eta + PeriodicFunction::constant(64, s.avg);
    for (double x : res.samples()) EXPECT_LT(std::abs(x), 1e-12);
}

TEST(Cohomology, ResonanceNamesMode) {
    std::mt19937_64 rng(22);
    const auto eta = random_band(32, 10, rng);
    try {
        solve_small_divisor(eta, 0.25);
        FAIL() << "expected a resonance error";
    } catch (const ResonanceError& e) {
        EXPECT_EQ(e.k() % 4, 0);
    }
    EXPECT_LT(resonance_guard(0.25, 32), 1e-12);
    EXPECT_GT(resonance_guard(kGolden, 32), 1e-3);
}

TEST(Cohomology, MultipleReducesToSingle) {
    std::mt19937_64 rng(23);
    const auto eta = random_band(32, 10, rng);
    const auto single = solve_small_divisor(eta, kGolden);
    const auto multi = solve_multiple_small_divisor({eta}, kGolden);
    EXPECT_NEAR(multi.avg, single.avg, 1e-15);
    for (int j = 0; j < 32; ++j) EXPECT_NEAR(multi.xi[0][j], single.xi[j], 1e-14);

    const auto ns = solve_non_small_divisor(eta, kGolden, 3.0, 0.5);
    const auto mns = solve_multiple_non_small_divisor({eta}, kGolden, 3.0, 0.5);
    for (int j = 0; j < 32; ++j) EXPECT_NEAR(mns[0][j], ns[j], 1e-14);
}

TEST(Cohomology, MultipleSmallDivisorResidual) {
    std::mt19937_64 rng(24);
    const int m = 4, n = 64;
    std::vector<PeriodicFunction> etas;
    for (int i = 0; i < m; ++i) etas.push_back(random_band(n, 12, rng));
    const auto s = solve_multiple_small_divisor(etas, kGolden);
    double mean = 0;
    for (const auto& e : etas) mean += average(e) / m;
    EXPECT_NEAR(s.avg, mean, 1e-15);
    EXPECT_LT(std::abs(average(s.xi[0])), 1e-16);
    for (int i = 0; i < m; ++i) {
        const auto res = s.xi[i] - rotate(s.xi[(i + 1) % m], kGolden / m) - etas[i] + PeriodicFunction::constant(n, s.avg);
        for (double x : res.samples()) EXPECT_LT(std::abs(x), 1e-11);
    }
}

TEST(Cohomology, NonSmallDivisor) {
    const auto c = solve_non_small_divisor(PeriodicFunction::constant(8, 3.0), kGolden, 2.0, 0.0);
    for (double x : c.samples()) EXPECT_NEAR(x, 1.5, 1e-15);
    EXPECT_THROW(solve_non_small_divisor(PeriodicFunction::constant(8, 1.0), kGolden, 0.0, 0.0), DegenerateError);
    EXPECT_THROW(solve_non_small_divisor(PeriodicFunction::constant(8, 1.0), kGolden, 2.0, -2.0), DegenerateError);

    std::mt19937_64 rng(25);
    const auto eta = PeriodicFunction::from_samples(phtori::testing::random_samples(32, rng));
    const auto xi = solve_non_small_divisor(eta, kGolden, 1.7, 0.4);
    const auto res = 1.7 * xi - 0.4 * rotate(xi, kGolden) - eta;
    for (double x : res.samples()) EXPECT_LT(std::abs(x), 1e-12);
}

TEST(Cohomology, MultipleNonSmallDivisor) {
    const int m = 4, n = 32;
    std::vector<PeriodicFunction> cst;
    for (int i = 0; i < m; ++i) cst.push_back(PeriodicFunction::constant(n, i + 1.0));
    const auto xc = solve_multiple_non_small_divisor(cst, kGolden, 4.0, 0.0);
    for (int i = 0; i < m; ++i) EXPECT_NEAR(xc[i][3], (i + 1.0) / 4, 1e-15);

    std::mt19937_64 rng(26);
    std::vector<PeriodicFunction> etas;
    for (int i = 0; i < m; ++i) etas.push_back(PeriodicFunction::from_samples(phtori::testing::random_samples(n, rng)));
    const auto xi = solve_multiple_non_small_divisor(etas, kGolden, 5.0, 1.0);
    for (int i = 0; i < m; ++i) {
        const auto res = 5.0 * xi[i] - rotate(xi[(i + 1) % m], kGolden / m) - etas[i];
        for (double x : res.samples()) EXPECT_LT(std::abs(x), 1e-11);
    }
}

TEST(Cohomology, Linearity) {
    std::mt19937_64 rng(27);
    const auto a = random_band(32, 10, rng), b = random_band(32, 10, rng);
    const auto sa = solve_small_divisor(a, kGolden).xi, sb = solve_small_divisor(b, kGolden).xi;
    const auto sab = solve_small_divisor(2.0 * a + (-3.0) * b, kGolden).xi;
    const auto d = sab - 2.0 * sa + 3.0 * sb;
    for (double x : d.samples()) EXPECT_LT(std::abs(x), 1e-12);
}

TEST(Cohomology, MatchesDenseOracle) {
    std::mt19937_64 rng(28);
    for (int n : {8, 16, 32}) {
        for (int m : {1, 2, 3, 4}) {
            std::vector<PeriodicFunction> etas;
            std::vector<Eigen::VectorXd> rhs;
            for (int i = 0; i < m; ++i) {
                etas.push_back(PeriodicFunction::from_samples(phtori::testing::random_samples(n, rng)));
                rhs.push_back(vec(etas.back()));
            }
            const auto sd = solve_multiple_small_divisor(etas, kGolden);
            std::vector<Eigen::VectorXd> centered = rhs;
            for (auto& r : centered) r.array() -= sd.avg;
            const auto dense_sd = phtori::testing::dense_multiple_solve(centered, kGolden, 1.0, 1.0, true);
            const auto nsd = solve_multiple_non_small_divisor(etas, kGolden, 1.8, 0.6);
            const auto dense_nsd = phtori::testing::dense_multiple_solve(rhs, kGolden, 1.8, 0.6, false);
            for (int i = 0; i < m; ++i) {
                EXPECT_LT(phtori::testing::max_coeff_diff(sd.xi[i], dense_sd[i]), 1e-10) << "n " << n << " m " << m;
                EXPECT_LT(phtori::testing::max_coeff_diff(nsd[i], dense_nsd[i]), 1e-10) << "n " << n << " m " << m;
            }
        }
    }
}

TEST(Cohomology, SecondEtaLegZero) {
    // m = 2 with eta_1 = 0: leg 0 alone satisfies the mean-adjusted equation.
    std::mt19937_64 rng(29);
    const int n = 32;
    const auto eta0 = random_band(n, 10, rng);
    const auto s = solve_multiple_small_divisor({eta0, PeriodicFunction(n)}, kGolden);
    const auto dense = phtori::testing::dense_multiple_solve(
        {Eigen::VectorXd(vec(eta0).array() - s.avg), Eigen::VectorXd::Constant(n, -s.avg)}, kGolden, 1, 1, true);
    EXPECT_LT(phtori::testing::max_coeff_diff(s.xi[0], dense[0]), 1e-12);
    EXPECT_LT(phtori::testing::max_coeff_diff(s.xi[1], dense[1]), 1e-12);
}

#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "phtori/periodic.hpp"

// Slow reference implementations used as independent oracles.
namespace phtori::testing {

inline constexpr double kTwoPi = 2 * std::numbers::pi;

// c_k = (1/N) sum_j f_j e^{-i 2 pi k j / N}, k = 0..N/2, by direct summation.
inline std::vector<cplx> direct_dft(const std::vector<double>& f) {
    const int n = static_cast<int>(f.size());
    std::vector<cplx> c(n / 2 + 1);
    for (int k = 0; k <= n / 2; ++k) {
        cplx s = 0;
        for (int j = 0; j < n; ++j) s += f[j] * std::polar(1.0, -kTwoPi * k * j / n);
        c[k] = s / double(n);
    }
    return c;
}

// Real trigonometric interpolant of grid values at theta.
inline double interpolate(const std::vector<double>& f, double theta) {
    const auto c = direct_dft(f);
    const int n = static_cast<int>(f.size());
    double v = c[0].real() + c[n / 2].real() * std::cos(std::numbers::pi * n * theta);
    for (int k = 1; k < n / 2; ++k) v += 2 * (c[k] * std::polar(1.0, kTwoPi * k * theta)).real();
    return v;
}

// (R f)_j = interpolant of f at j/N + delta.
inline Eigen::MatrixXd rotation_matrix(int n, double delta) {
    Eigen::MatrixXd r(n, n);
    for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) {
            const double x = double(j - l) / n + delta;
            double d = 1 + std::cos(std::numbers::pi * n * x);
            for (int k = 1; k < n / 2; ++k) d += 2 * std::cos(kTwoPi * k * x);
            r(j, l) = d / n;
        }
    return r;
}

// Random real samples of a function with modes 0..band.
inline std::vector<double> band_limited(int n, int band, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    std::vector<cplx> c(n / 2 + 1, 0.0);
    c[0] = g(rng);
    for (int k = 1; k <= band && k < n / 2; ++k) c[k] = cplx(g(rng), g(rng)) / double(k);
    return to_samples(c, n);
}

inline std::vector<double> random_samples(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<double> f(n);
    for (auto& x : f) x = u(rng);
    return f;
}

// Solves lambda xi_i - mu R xi_{i+1} = rhs_i (i = 0..m-1, xi_m = xi_0) as one dense
// (mN x mN) system with R the rotation by omega/m. With zero_mean_leg0 the system is
// the singular small divisor one; the row constraint <xi_0> = 0 is appended.
inline std::vector<Eigen::VectorXd> dense_multiple_solve(const std::vector<Eigen::VectorXd>& rhs, double omega,
                                                         double lambda, double mu, bool zero_mean_leg0) {
    const int m = static_cast<int>(rhs.size());
    const int n = static_cast<int>(rhs.front().size());
    const Eigen::MatrixXd r = rotation_matrix(n, omega / m);
    const int rows = m * n + (zero_mean_leg0 ? 1 : 0);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, m * n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(rows);
    for (int i = 0; i < m; ++i) {
        const int next = (i + 1) % m;
        a.block(i * n, i * n, n, n) += lambda * Eigen::MatrixXd::Identity(n, n);
        a.block(i * n, next * n, n, n) -= mu * r;
        b.segment(i * n, n) = rhs[i];
    }
    if (zero_mean_leg0) a.block(m * n, 0, 1, n).setConstant(1.0 / n);
    const Eigen::VectorXd x = a.colPivHouseholderQr().solve(b);
    std::vector<Eigen::VectorXd> out;
    for (int i = 0; i < m; ++i) out.push_back(x.segment(i * n, n));
    return out;
}

inline double max_coeff_diff(const PeriodicFunction& f, const Eigen::VectorXd& samples) {
    const auto c = direct_dft(std::vector<double>(samples.data(), samples.data() + samples.size()));
    double d = 0;
    for (std::size_t k = 0; k < c.size(); ++k) d = std::max(d, std::abs(c[k] - f.coeffs()[k]));
    return d;
}

}  // namespace phtori::testing

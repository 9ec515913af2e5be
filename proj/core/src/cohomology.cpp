#include "phtori/cohomology.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "phtori/errors.hpp"

namespace phtori {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

// Multiplier of coefficient k under rotate(., delta).
cplx shift_factor(int k, int n, double delta) {
    if (k == n / 2) return std::cos(std::numbers::pi * n * delta);
    return std::polar(1.0, kTwoPi * k * delta);
}

void check_grid(const std::vector<PeriodicFunction>& etas) {
    if (etas.empty()) throw std::invalid_argument("need at least one leg");
    for (const auto& e : etas)
        if (e.size() != etas.front().size()) throw std::invalid_argument("legs must share N");
}

bool mode_present(const std::vector<PeriodicFunction>& etas, int k) {
    for (const auto& e : etas)
        if (e.coeffs()[k] != cplx(0.0)) return true;
    return false;
}

}  // namespace

double resonance_guard(double omega, int n) {
    double g = 2.0;
    for (int k = 1; k <= n / 2; ++k) g = std::min(g, std::abs(1.0 - shift_factor(k, n, omega)));
    return g;
}

SmallDivisorSolution solve_small_divisor(const PeriodicFunction& eta, double omega,
                                         const CohomologyOptions& opt) {
    auto r = solve_multiple_small_divisor({eta}, omega, opt);
    return {std::move(r.xi.front()), r.avg};
}

MultipleSmallDivisorSolution solve_multiple_small_divisor(const std::vector<PeriodicFunction>& etas,
                                                          double omega, const CohomologyOptions& opt) {
    check_grid(etas);
    const int m = static_cast<int>(etas.size());
    const int n = etas.front().size();
    const double step = omega / m;

    MultipleSmallDivisorSolution out;
    double sum = 0;
    for (const auto& e : etas) sum += average(e);
    out.avg = sum / m;

    std::vector<std::vector<cplx>> xi(m, std::vector<cplx>(n / 2 + 1, cplx(0.0)));
    for (int k = 1; k <= n / 2; ++k) {
        if (!mode_present(etas, k)) continue;
        const cplx rho = shift_factor(k, n, step);
        const cplx div = 1.0 - std::pow(rho, m);
        if (std::abs(div) < opt.divisor_floor) throw ResonanceError(k, std::abs(div));
        for (int j = 0; j < m; ++j) {
            cplx acc = 0.0, w = 1.0;
            for (int i = 0; i < m; ++i) {
                acc += w * etas[(j + i) % m].coeffs()[k];
                w *= rho;
            }
            xi[j][k] = acc / div;
        }
    }
    double mean = 0;
    for (int j = 0; j < m; ++j) {
        if (j > 0) mean -= average(etas[j - 1]) - out.avg;
        xi[j][0] = mean;
    }
    out.xi.reserve(m);
    for (int j = 0; j < m; ++j) out.xi.push_back(PeriodicFunction::from_coeffs(std::move(xi[j]), n));
    return out;
}

PeriodicFunction solve_non_small_divisor(const PeriodicFunction& eta, double omega, double lambda,
                                         double mu, const CohomologyOptions& opt) {
    return std::move(solve_multiple_non_small_divisor({eta}, omega, lambda, mu, opt).front());
}

std::vector<PeriodicFunction> solve_multiple_non_small_divisor(const std::vector<PeriodicFunction>& etas,
                                                               double omega, double lambda, double mu,
                                                               const CohomologyOptions& opt) {
    check_grid(etas);
    const double big = std::max(std::abs(lambda), std::abs(mu));
    if (big == 0.0 || std::abs(std::abs(lambda) - std::abs(mu)) <= opt.divisor_floor * big)
        throw DegenerateError("non-small divisor equation with |lambda| = |mu|");
    const int m = static_cast<int>(etas.size());
    const int n = etas.front().size();
    const double step = omega / m;

    std::vector<double> lam_pow(m + 1, 1.0), mu_pow(m + 1, 1.0);
    for (int i = 1; i <= m; ++i) {
        lam_pow[i] = lam_pow[i - 1] * lambda;
        mu_pow[i] = mu_pow[i - 1] * mu;
    }

    std::vector<std::vector<cplx>> xi(m, std::vector<cplx>(n / 2 + 1, cplx(0.0)));
    for (int k = 0; k <= n / 2; ++k) {
        if (!mode_present(etas, k)) continue;
        const cplx rho = k == 0 ? cplx(1.0) : shift_factor(k, n, step);
        const cplx div = lam_pow[m] - mu_pow[m] * std::pow(rho, m);
        if (std::abs(div) < opt.divisor_floor) throw ResonanceError(k, std::abs(div));
        for (int j = 0; j < m; ++j) {
            cplx acc = 0.0, w = 1.0;
            for (int i = 0; i < m; ++i) {
                acc += mu_pow[i] * lam_pow[m - 1 - i] * w * etas[(j + i) % m].coeffs()[k];
                w *= rho;
            }
            xi[j][k] = acc / div;
        }
    }
    std::vector<PeriodicFunction> out;
    out.reserve(m);
    for (int j = 0; j < m; ++j) out.push_back(PeriodicFunction::from_coeffs(std::move(xi[j]), n));
    return out;
}

}  // namespace phtori

#pragma once

#include <vector>

#include "phtori/periodic.hpp"

namespace phtori {

struct CohomologyOptions {
    double divisor_floor = 1e-8;
};

// Smallest |1 - e^{i 2 pi k omega}| over 0 < k <= N/2 (Nyquist uses the real divisor).
double resonance_guard(double omega, int n);

struct SmallDivisorSolution {
    PeriodicFunction xi;
    double avg = 0;
};

// xi(theta) - xi(theta + omega) = eta(theta) - <eta>, <xi> = 0.
SmallDivisorSolution solve_small_divisor(const PeriodicFunction& eta, double omega,
                                         const CohomologyOptions& opt = {});

struct MultipleSmallDivisorSolution {
    std::vector<PeriodicFunction> xi;
    double avg = 0;  // (1/m) sum <eta_i>
};

// xi_i(theta) - xi_{i+1}(theta + omega/m) = eta_i(theta) - <eta>, xi_m = xi_0, <xi_0> = 0.
MultipleSmallDivisorSolution solve_multiple_small_divisor(const std::vector<PeriodicFunction>& etas,
                                                          double omega,
                                                          const CohomologyOptions& opt = {});

// lambda xi(theta) - mu xi(theta + omega) = eta(theta).
PeriodicFunction solve_non_small_divisor(const PeriodicFunction& eta, double omega, double lambda,
                                         double mu, const CohomologyOptions& opt = {});

// lambda xi_i(theta) - mu xi_{i+1}(theta + omega/m) = eta_i(theta), xi_m = xi_0.
std::vector<PeriodicFunction> solve_multiple_non_small_divisor(const std::vector<PeriodicFunction>& etas,
                                                               double omega, double lambda, double mu,
                                                               const CohomologyOptions& opt = {});

}  // namespace phtori

#pragma once

#include <cstdint>
#include <vector>

#include "phtori/newton.hpp"

namespace phtori {

// delta-independent random curves, one per leg: Fourier modes 1..band with
// normal coefficients decaying like 1/k^2, scaled to unit max norm on the grid.
std::vector<CurveMap> random_band_limited(int m, int N, int dim, int band, std::uint64_t seed);

struct CancellationPoint {
    double delta = 0;
    double err = 0;         // invariance error of the perturbed torus
    double eta3_mean = 0;   // max |<eta^3>|
};

struct CancellationReport {
    std::vector<CancellationPoint> points;
    double slope = 0;  // least squares slope of log |<eta^3>| against log delta
};

// Perturbs K_i by delta * R_i and measures the average of the third block of the
// right-hand side of the torus Newton system.
CancellationReport cancellation_scaling(const HamiltonianModel& model, const TorusState& state,
                                        const std::vector<double>& deltas, int band = 8, std::uint64_t seed = 1,
                                        const IntegratorConfig& cfg = {}, const FrameOptions& fopt = {});

struct TwistReport {
    Mat isochronous;            // symmetrized <S^1>
    double isochronous_det = 0;
    double isochronous_cond = 0;
    Mat bordered;               // isoenergetic bordered matrix
    double bordered_det = 0;
    double bordered_cond = 0;
};

// Twist matrices of both Newton variants; throws TwistError only for a singular frame.
TwistReport twist_report(const AdaptedFrame& frame);

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace phtori

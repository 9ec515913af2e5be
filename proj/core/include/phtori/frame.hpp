#pragma once

#include <vector>

#include "phtori/cohomology.hpp"
#include "phtori/torus.hpp"

namespace phtori {

// Flow of every leg for time T/m: endpoints phi(K_i(theta_j)) and Jacobians.
struct LegFlow {
    std::vector<Mat> endpoints;               // per leg, N x dim
    std::vector<std::vector<Mat>> jacobians;  // per leg, per grid point, dim x dim
    FlowStats stats;
};

LegFlow flow_legs(const HamiltonianModel& model, const TorusState& state, const IntegratorConfig& cfg = {});

struct FrameOptions {
    bool constant_torsion = false;
    // Divide the K' column by its RMS size so that narrow tori give an O(1) frame.
    bool normalize_tangent = true;
    CohomologyOptions cohomology;
};

// Multiple symplectic frame P_i and torsion S^1_i of a multiple torus and bundle.
// Column layout of P_i(theta) for n = 3: [K' | X_H(K) | W | N1 | N2 | W_complement].
struct AdaptedFrame {
    int n = 0;
    int m = 0;
    int N = 0;
    double omega = 0;
    double lambda = 0;
    bool constant_torsion = false;
    double tangent_scale = 1;  // first column of L_i is K_i' / tangent_scale

    std::vector<std::vector<Mat>> P;       // P_i(theta_j)
    std::vector<std::vector<Mat>> P_next;  // P_{i+1}(theta_j + omega/m)
    std::vector<std::vector<Mat>> S1;      // S^1_i(theta_j), (n-1) x (n-1)
    Mat S1_mean;                           // (1/m) sum <S^1_i>

    // Invariance errors seen by the same flow, E_i and E^W_i on the grid (N x dim).
    std::vector<Mat> E;
    std::vector<Mat> EW;
    double err = 0;
    double err_w = 0;
    // Largest |S^1 - S^1^T| of the first reduction, before symmetrizing.
    double raw_torsion_asymmetry = 0;

    std::vector<std::vector<Mat>> jacobians;  // shared with the LegFlow it was built from

    int dim() const { return 2 * n; }
};

AdaptedFrame build_frame(const HamiltonianModel& model, const TorusState& state, const LegFlow& flow,
                         const FrameOptions& opt = {});
AdaptedFrame build_frame(const HamiltonianModel& model, const TorusState& state, const IntegratorConfig& cfg = {},
                         const FrameOptions& opt = {});

// P^{-1} for a symplectic P.
Mat symplectic_inverse(const Mat& p);

struct FrameQuality {
    double reduction_residual = 0;    // max |P_{i+1}(+)^{-1} Dphi P_i - reduced form|
    double symplecticity_defect = 0;  // max |P_i^T Omega P_i - Omega|
    double torsion_symmetry = 0;      // max |S^1_i - S^1_i^T|, before symmetrizing
    double lagrangian_defect = 0;     // max |L_i^T Omega L_i|
    double torsion_spread = 0;        // max |S^1_i - <S^1>|
};

FrameQuality frame_quality(const AdaptedFrame& frame);

// Mean torsion, symmetrized.
Mat mean_torsion(const AdaptedFrame& frame);

}  // namespace phtori

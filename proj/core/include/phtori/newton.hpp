#pragma once

#include <limits>
#include <vector>

#include "phtori/frame.hpp"

namespace phtori {

enum class NewtonMode { isochronous, isoenergetic };

std::string to_string(NewtonMode mode);

struct NewtonOptions {
    CohomologyOptions cohomology;
    int tail_cutoff = -1;        // -1: N/4
    double twist_limit = 1e12;   // largest accepted condition number of the twist system
};

// Solution of the linearized torus equations in frame coordinates.
struct TorusCorrection {
    std::vector<Mat> xi;  // per leg, N x 2n
    double dtau = 0;
    Vec xi3_mean;         // xi^3_{0,0}
    Vec eta3_mean;        // <eta^3>, quadratically small for Newton right-hand sides
    Mat twist;
    double twist_condition = 0;
};

// eta: per leg, N x 2n. energy_rhs is the right-hand side of the energy row of the
// bordered system (isoenergetic mode only).
TorusCorrection solve_torus_system(const AdaptedFrame& frame, const std::vector<Mat>& eta, NewtonMode mode,
                                   double energy_rhs, const NewtonOptions& opt = {});

struct BundleCorrection {
    std::vector<Mat> xi;
    double dlambda = 0;
};

BundleCorrection solve_bundle_system(const AdaptedFrame& frame, const std::vector<Mat>& eta,
                                     const NewtonOptions& opt = {});

// -P_{i+1}(theta + omega/m)^{-1} E_i(theta) on the grid.
std::vector<Mat> frame_coordinates(const AdaptedFrame& frame, const std::vector<Mat>& errors);
// P_i(theta) xi_i(theta) on the grid.
std::vector<Mat> apply_frame(const AdaptedFrame& frame, const std::vector<Mat>& xi);

struct NewtonReport {
    double err_before = 0;
    double err_after = std::numeric_limits<double>::quiet_NaN();
    double energy_error = 0;
    double dtau = 0;
    double dh = 0;
    double dlambda = 0;
    Mat twist;
    double twist_condition = 0;
    Vec eta3_mean;
};

struct StepResult {
    TorusState state;
    NewtonReport report;
};

StepResult newton_torus_step(const HamiltonianModel& model, const TorusState& state, const AdaptedFrame& frame,
                             NewtonMode mode, const NewtonOptions& opt = {});
StepResult newton_bundle_step(const HamiltonianModel& model, const TorusState& state, const AdaptedFrame& frame,
                              const NewtonOptions& opt = {});

struct RefineConfig {
    double eps = 1e-7;
    double eps_w = 1e-5;
    int max_iters = 10;
    NewtonMode mode = NewtonMode::isochronous;
    double divergence_factor = 1e3;  // stop once err exceeds this multiple of the first err
    // Bundle-only steps on the initial flow while err^W exceeds both eps_w and 10 err
    // (fresh seeds); they need no integration.
    int bundle_presteps = 4;
    IntegratorConfig integrator;
    FrameOptions frame;
    NewtonOptions newton;
};

struct RefineReport {
    bool converged = false;
    int iterations = 0;
    int bundle_presteps = 0;
    std::vector<double> err_history;    // torus error before each iteration
    std::vector<double> err_w_history;  // bundle error before each iteration
    std::vector<NewtonReport> steps;
};

// Alternates torus and bundle Newton steps until err < eps and err^W < eps_w.
// Throws NoConvergenceError when the budget is exhausted or the iteration diverges.
TorusState refine(const HamiltonianModel& model, const TorusState& state, const RefineConfig& cfg,
                  RefineReport* report = nullptr);

// Invariance error of the bundle with a single applied variational column per point.
double bundle_error(const HamiltonianModel& model, const TorusState& state, const IntegratorConfig& cfg = {});

}  // namespace phtori

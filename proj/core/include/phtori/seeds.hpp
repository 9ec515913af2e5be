#pragma once

#include <optional>
#include <utility>

#include "phtori/newton.hpp"

namespace phtori {

// Symmetric Lyapunov periodic orbit around L1 with its Floquet data.
struct PeriodicOrbit {
    Vec x0;
    double period = 0;
    Mat monodromy;
    double h = 0;
    Generator family = Generator::vertical;
    double amplitude = 0;          // |x3| (vertical) or x_L1 - x1 (planar) at t = 0
    double nu = 0;                 // rotation of the unit-circle pair, in [0, 1/2]
    double hyperbolic_multiplier = 0;  // real multiplier of modulus > 1
    Eigen::VectorXcd elliptic_vector;  // eigenvector of e^{+i 2 pi nu}, unit norm
    Vec unstable_vector;
    Vec stable_vector;
    double closure_error = 0;      // |phi_T(x0) - x0|
};

// What lyapunov_po aims at: a fixed amplitude, an energy or a rotation nu.
struct PoTarget {
    enum class Kind { amplitude, energy, rotation };
    Kind kind = Kind::amplitude;
    double value = 0;

    static PoTarget with_amplitude(double a) { return {Kind::amplitude, a}; }
    static PoTarget with_energy(double h) { return {Kind::energy, h}; }
    static PoTarget with_rotation(double nu) { return {Kind::rotation, nu}; }
};

struct PoConfig {
    double tol = 1e-12;         // on the symmetry conditions at half period
    int max_iters = 30;
    double amplitude_step = 0.002;  // marching step in amplitude
    double max_amplitude = 0.4;
    int max_secant = 60;
    double target_tol = 1e-12;
    IntegratorConfig integrator;
};

// Corrects a symmetric periodic orbit of the RTBP family (vertical: start on
// x2 = p1 = p3 = 0 with x3 = A; planar: start on x2 = x3 = p1 = p3 = 0).
// guess, when given, is a previous member of the family.
PeriodicOrbit lyapunov_po(const RtbpModel& model, Generator family, PoTarget target,
                          const PeriodicOrbit* guess = nullptr, const PoConfig& cfg = {});

// Floquet data (nu, multipliers, eigenvectors) from a monodromy matrix.
void floquet_data(PeriodicOrbit& po);

struct SeedConfig {
    double amplitude = 1e-3;
    int m = 4;
    int N = 32;
    BundleKind bundle = BundleKind::stable;
    IntegratorConfig integrator;
};

// Invariant curve of the linearized flow around po, split into m legs, with the
// chosen Floquet bundle. omega = nu, T = period, h = <H(K_0)>.
TorusState seed_from_po(const HamiltonianModel& model, const PeriodicOrbit& po, const SeedConfig& cfg = {});

// Refines a fresh seed at fixed energy h = <H(K_0)> and fixed omega. At T equal to
// the orbit period the isochronous problem is solved by the orbit itself.
TorusState refine_seed(const HamiltonianModel& model, const TorusState& seed, const RefineConfig& cfg,
                       RefineReport* report = nullptr);

struct FlowMapTorus {
    CurveMap K;
    double T = 0;
    PeriodicFunction tau;
};

// From phi_{T_P(theta)}(K_P(theta)) = K_P(theta + omega) to a curve with constant
// flying time: tau(theta) - tau(theta + omega) = T_P - <T_P>, <tau> = 0,
// K = phi_tau(K_P), T = <T_P>.
FlowMapTorus poincare_to_flowmap(const HamiltonianModel& model, const CurveMap& k_p, const PeriodicFunction& t_p,
                                 double omega, const IntegratorConfig& cfg = {},
                                 const CohomologyOptions& opt = {});

// Residual max |phi_{T_P(theta)}(K_P(theta)) - K_P(theta + omega)| on the grid.
double poincare_residual(const HamiltonianModel& model, const CurveMap& k_p, const PeriodicFunction& t_p,
                         double omega, const IntegratorConfig& cfg = {});

// Flows every grid point of k by its own time.
CurveMap flow_by(const HamiltonianModel& model, const CurveMap& k, const PeriodicFunction& times,
                 const IntegratorConfig& cfg = {});

}  // namespace phtori

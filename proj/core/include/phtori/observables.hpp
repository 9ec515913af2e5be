#pragma once

#include <array>
#include <iosfwd>

#include "phtori/frame.hpp"

namespace phtori {

// <a(K(theta))^T K'(theta)>, spectral mean on the grid.
double calabi(const SymplecticStructure& structure, const CurveMap& k);

struct CalabiPair {
    double c1 = 0;
    double c2 = 0;
    double generator = 0;  // C(K_0)
    double companion = 0;  // C of the curve theta -> phi_{T theta}(K(-theta omega))
};

// Companion curve of the generator for the second angle, sampled at n2 points:
// gamma(theta) = phi_{s T}(K_j(-s omega)), j = floor(m theta), s = theta - j/m.
struct CompanionCurve {
    Mat points;       // n2 x dim
    Mat derivative;   // n2 x dim
};

CompanionCurve companion_curve(const HamiltonianModel& model, const TorusState& state, int n2 = 256,
                               const IntegratorConfig& cfg = {});

// Calabi invariants of the 2-torus with frequencies (omega_p, omega_v) generated by state.
CalabiPair calabi_2d(const HamiltonianModel& model, const TorusState& state, int n2 = 256,
                     const IntegratorConfig& cfg = {});

struct BundleDistances {
    double tangent_field = 0;      // d(TK, X)
    double stable_unstable = 0;    // d(E^s, E^u)
    double stable_center = 0;      // d(E^s, E^c)
    double unstable_center = 0;    // d(E^u, E^c)
};

// Length of the projection of the unit vector of u onto the orthogonal complement of span(basis).
double subspace_distance(const Vec& u, const Mat& basis);

// Minimum over legs and grid points. E^c is spanned by the K', X_H and first two
// normal columns of the frame, orthonormalized before projecting.
BundleDistances bundle_distances(const TorusState& state, const AdaptedFrame& frame);

struct Frequencies {
    double omega_p = 0;
    double omega_v = 0;
    double nu_p = 0;
    double nu_v = 0;
};

Frequencies natural_frequencies(const TorusState& state);

// Sampled 2-torus hat K(theta1, theta2) = phi_{(theta2 - j/m) T}(K_j(theta1 - (theta2 - j/m) omega)).
struct Surface {
    int n1 = 0;
    int n2 = 0;
    Mat points;       // n1 * n2 rows, row index i2 * n1 + i1, full phase-space state
    Mat generator1;   // theta2 = 0: K_0 on n1 points
    Mat generator2;   // theta1 = 0: companion curve on n2 points
};

Surface globalize_surface(const HamiltonianModel& model, const TorusState& state, int n1, int n2,
                          const IntegratorConfig& cfg = {});

// Text export: header line, then rows theta1 theta2 x1 x2 x3, then the two generators.
void write_surface(std::ostream& os, const TorusState& state, const Surface& surface);

struct ObservableRecord {
    double T = 0;
    double omega = 0;
    double h = 0;
    double unstable_multiplier = 0;  // Lambda^u
    double floquet_exponent = 0;     // log(Lambda^u) / T
    double c1 = 0;
    double c2 = 0;
    double r1 = 0;
    double r2 = 0;
    BundleDistances distances;
    Frequencies frequencies;
    int N = 0;
    int m = 0;
};

struct ObservableOptions {
    int n2 = 256;
    IntegratorConfig integrator;
};

ObservableRecord compute_observables(const HamiltonianModel& model, const TorusState& state,
                                     const AdaptedFrame& frame, const ObservableOptions& opt = {});
ObservableRecord compute_observables(const HamiltonianModel& model, const TorusState& state,
                                     const ObservableOptions& opt = {});

}  // namespace phtori

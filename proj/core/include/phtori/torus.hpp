#pragma once

#include <limits>
#include <string>
#include <vector>

#include "phtori/flow.hpp"
#include "phtori/periodic.hpp"

namespace phtori {

enum class Generator { vertical, planar };
enum class BundleKind { stable, unstable };

std::string to_string(Generator g);
std::string to_string(BundleKind b);
Generator parse_generator(const std::string& s);
BundleKind parse_bundle(const std::string& s);

// Multiple torus K_0..K_{m-1}, multiple rank-one bundle W_0..W_{m-1}, flying time
// T and per-leg multiplier lambda, for a fixed rotation number omega:
//   phi_{T/m}(K_i(theta)) = K_{i+1}(theta + omega/m),
//   Dphi_{T/m}(K_i(theta)) W_i(theta) = lambda W_{i+1}(theta + omega/m),  K_m = K_0.
struct TorusState {
    int n = 3;
    int m = 1;
    double omega = 0;
    double T = 0;
    double lambda = 0;
    double h = 0;
    std::vector<CurveMap> K;
    std::vector<CurveMap> W;
    Generator generator = Generator::vertical;
    BundleKind bundle = BundleKind::stable;
    double err = std::numeric_limits<double>::quiet_NaN();
    double err_w = std::numeric_limits<double>::quiet_NaN();

    int N() const { return K.empty() ? 0 : K.front().size(); }
    int dim() const { return 2 * n; }
    void validate() const;
};

struct TorusError {
    std::vector<CurveMap> E;
    double err = 0;
    double energy_error = 0;  // <H(K_0)> - h
};

// Invariance error of the multiple torus with plain point flows.
TorusError torus_error(const HamiltonianModel& model, const TorusState& state, const IntegratorConfig& cfg = {});

double mean_energy(const HamiltonianModel& model, const CurveMap& k);

// (T^2 + lambda^2 + sum_i <|K_i|^2> + <|W_i|^2>)^{1/2}
double compound_norm(const std::vector<CurveMap>& K, const std::vector<CurveMap>& W, double T, double lambda);

TorusState resample_state(const TorusState& s, int n_new, int tail_cutoff = -1);
TorusState clean_state(const TorusState& s, int tail_cutoff = -1);
// Rebuilds every component from its samples, so that values read back from disk
// and values kept in memory are identical.
TorusState canonicalize(const TorusState& s);

// Lambda^u and the Floquet exponent of the whole torus.
double unstable_multiplier(const TorusState& s);

}  // namespace phtori

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "phtori/newton.hpp"
#include "phtori/observables.hpp"

namespace phtori {

enum class Parameter { T, h, omega };

std::string to_string(Parameter p);
Parameter parse_parameter(const std::string& s);

// Derivatives of (K_i, W_i, T, lambda) along a family, with respect to one parameter.
struct TangentData {
    Parameter tag = Parameter::T;
    std::vector<CurveMap> dK;
    std::vector<CurveMap> dW;
    double dT = 0;
    double dlambda = 0;
    double dh = 0;      // 1 for h, 0 for omega; for T the energy drift is not tracked
    double domega = 0;  // 1 for omega, else 0
    double dtau = 0;
    std::vector<Mat> xi_torus;  // frame coordinates of dK, per leg N x 2n
    double twist_condition = 0;
};

struct TangentOptions {
    NewtonOptions newton;
    IntegratorConfig integrator;
};

TangentData tangent_T(const HamiltonianModel& model, const TorusState& state, const AdaptedFrame& frame,
                      const TangentOptions& opt = {});
TangentData tangent_h(const HamiltonianModel& model, const TorusState& state, const AdaptedFrame& frame,
                      const TangentOptions& opt = {});
TangentData tangent_omega(const HamiltonianModel& model, const TorusState& state, const AdaptedFrame& frame,
                          const TangentOptions& opt = {});
TangentData tangent(const HamiltonianModel& model, const TorusState& state, const AdaptedFrame& frame,
                    Parameter tag, const TangentOptions& opt = {});

// Norm of the compound object (dK, dW, dT, dlambda).
double tangent_norm(const TangentData& t);

// state + alpha * t / |t|; the parameter (T, h or omega) moves by alpha * d(param) / |t|.
TorusState predictor(const TorusState& state, const TangentData& t, double alpha);

// First-harmonic phase of component c of K_0, in turns.
double first_harmonic_phase(const TorusState& state, int component);
// Rotates every leg so that the first-harmonic phase of component c of K_0 is zero.
TorusState phase_align(const TorusState& state, int component);
// Tangent of the phase-aligned family: adds kappa (K', W') so that the phase stays fixed.
TangentData phase_align(const TorusState& state, const TangentData& t, int component);

// Nearest noble number found by replacing the continued fraction tail with ones,
// within tol of x. Returns x itself when no truncation gets within tol.
double nobilize(double x, double tol = 1.6e-4);

struct ContinuationConfig {
    Parameter tag = Parameter::T;
    double alpha = 1e-3;
    double alpha_min = 1e-5;
    double alpha_max = 1.0;
    double eps = 1e-7;
    double eps_w = 1e-5;
    double eps1 = 1e-8;
    double eps2 = 1e-12;
    // N is halved (while the halved torus keeps err <= eps1) once err <= halving_gate.
    // <= 0 means eps1; eps2 gives the stricter gate.
    double halving_gate = 0;
    int n_des = 4;
    int n_alpha = 5;
    int n_min = 32;
    int n_max = 8192;
    int max_iters = 10;
    int max_tori = 100;
    double calabi_floor = 1e-3;   // stop once |C_1| falls below after having exceeded it
    double param_min = -1e300;
    double param_max = 1e300;
    double nobilize_tol = 0;       // > 0: nobilize omega targets
    int tail_cutoff = -1;
    IntegratorConfig integrator;
    FrameOptions frame;
    NewtonOptions newton;
    ObservableOptions observables;

    void validate() const;
    RefineConfig refine_config(double eps_torus) const;
};

struct StepOutcome {
    TorusState state;
    double alpha_used = 0;
    double alpha_next = 0;
    int newton_iterations = 0;
    int alpha_halvings = 0;
    int n_doublings = 0;
    int n_halvings = 0;
    std::vector<std::string> log;
};

// One continuation step with step size and N adaptation.
StepOutcome continuation_step(const HamiltonianModel& model, const TorusState& state, double alpha,
                              const ContinuationConfig& cfg);

struct FamilyEntry {
    int index = 0;
    TorusState state;
    ObservableRecord observables;
    double alpha_used = 0;
    double alpha_next = 0;
    int newton_iterations = 0;
};

struct FamilyResult {
    std::vector<FamilyEntry> entries;  // empty when the sink does not keep them
    int accepted = 0;
    std::string stop_reason;
};

// The sink gets every accepted torus (index 0 is the start state); returning false stops.
using FamilySink = std::function<bool(const FamilyEntry&)>;

FamilyResult run_family(const HamiltonianModel& model, const TorusState& start, const ContinuationConfig& cfg,
                        const FamilySink& sink = {}, int first_index = 0, double alpha = -1, bool emit_start = true);

}  // namespace phtori

#include "phtori/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "phtori/errors.hpp"

namespace phtori {

std::string to_string(Parameter p) {
    switch (p) {
        case Parameter::T: return "T";
        case Parameter::h: return "h";
        case Parameter::omega: return "omega";
    }
    return "?";
}

Parameter parse_parameter(const std::string& s) {
    if (s == "T") return Parameter::T;
    if (s == "h") return Parameter::h;
    if (s == "omega") return Parameter::omega;
    throw ConfigError("unknown continuation parameter '" + s + "' (expected T, h or omega)");
}

namespace {

std::vector<CurveMap> to_curves(const std::vector<Mat>& per_leg) {
    std::vector<CurveMap> out;
    out.reserve(per_leg.size());
    for (const auto& s : per_leg) out.push_back(CurveMap::from_samples(s));
    return out;
}

// Bundle part of a tangent: E^W from the second variational action, then the bundle system.
void bundle_tangent(const HamiltonianModel& model, const TorusState& state, const AdaptedFrame& frame,
                    TangentData& t, const TangentOptions& opt) {
    const int m = state.m, N = state.N(), d = state.dim();
    const double step = state.omega / m;
    std::vector<Mat> ew(m);
    for (int i = 0; i < m; ++i) {
        const int nx = (i + 1) % m;
        const Mat ws = state.W[i].samples();
        const Mat dks = t.dK[i].samples();
        GridFlowRequest req;
        req.columns.resize(N);
        req.pairs = {{0, 1}};
        for (int j = 0; j < N; ++j) {
            Mat c(d, 2);
            c.col(0) = ws.row(j).transpose();
            c.col(1) = dks.row(j).transpose();
            req.columns[j] = std::move(c);
        }
        const GridFlowResult r = flow_grid(model, state.K[i].samples(), state.T / m, req, opt.integrator);
        const Mat knext = rotate(state.K[nx], step).samples();
        const Mat wnext = rotate(state.W[nx], step).samples();
        Mat dwnext;
        if (t.tag == Parameter::omega) dwnext = rotate(derivative(state.W[nx]), step).samples();
        Mat e(N, d);
        for (int j = 0; j < N; ++j) {
            Vec v = r.second_action[j].col(0);
            v += (state.lambda / m) * t.dT * (model.jacobian(Vec(knext.row(j).transpose())) * wnext.row(j).transpose());
            if (t.tag == Parameter::omega) v -= (state.lambda / m) * dwnext.row(j).transpose();
            e.row(j) = v.transpose();
        }
        ew[i] = std::move(e);
    }
    const BundleCorrection bc = solve_bundle_system(frame, frame_coordinates(frame, ew), opt.newton);
    t.dW = to_curves(apply_frame(frame, bc.xi));
    t.dlambda = bc.dlambda;
}

TangentData torus_tangent(const HamiltonianModel& model, const TorusState& state, const AdaptedFrame& frame,
                          Parameter tag, const TangentOptions& opt) {
    const int m = frame.m, N = frame.N, n = frame.n;
    std::vector<Mat> eta(m, Mat::Zero(N, 2 * n));
    NewtonMode mode = NewtonMode::isoenergetic;
    double energy_rhs = 0;
    TangentData t;
    t.tag = tag;
    switch (tag) {
        case Parameter::T:
            for (auto& e : eta) e.col(n - 2).setConstant(-1.0 / m);
            mode = NewtonMode::isochronous;
            break;
        case Parameter::h:
            energy_rhs = 1;
            t.dh = 1;
            break;
        case Parameter::omega:
            for (auto& e : eta) e.col(0).setConstant(frame.tangent_scale / m);
            t.domega = 1;
            break;
    }
    const TorusCorrection c = solve_torus_system(frame, eta, mode, energy_rhs, opt.newton);
    t.xi_torus = c.xi;
    t.dtau = c.dtau;
    t.dT = tag == Parameter::T ? 1.0 : m * c.dtau;
    t.twist_condition = c.twist_condition;
    t.dK = to_curves(apply_frame(frame, c.xi));
    bundle_tangent(model, state, frame, t, opt);
    return t;
}

}  // namespace

TangentData tangent_T(const HamiltonianModel& model, const TorusState& state, const AdaptedFrame& frame,
                      const TangentOptions& opt) {
    return torus_tangent(model, state, frame, Parameter::T, opt);
}

TangentData tangent_h(const HamiltonianModel& model, const TorusState& state, const AdaptedFrame& frame,
                      const TangentOptions& opt) {
    return torus_tangent(model, state, frame, Parameter::h, opt);
}

TangentData tangent_omega(const HamiltonianModel& model, const TorusState& state, const AdaptedFrame& frame,
                          const TangentOptions& opt) {
    return torus_tangent(model, state, frame, Parameter::omega, opt);
}

TangentData tangent(const HamiltonianModel& model, const TorusState& state, const AdaptedFrame& frame, Parameter tag,
                    const TangentOptions& opt) {
    return torus_tangent(model, state, frame, tag, opt);
}

double tangent_norm(const TangentData& t) { return compound_norm(t.dK, t.dW, t.dT, t.dlambda); }

TorusState predictor(const TorusState& state, const TangentData& t, double alpha) {
    const double s = alpha / tangent_norm(t);
    TorusState out = state;
    for (int i = 0; i < state.m; ++i) {
        out.K[i] = state.K[i] + s * t.dK[i];
        out.W[i] = state.W[i] + s * t.dW[i];
    }
    out.T = state.T + s * t.dT;
    out.lambda = state.lambda + s * t.dlambda;
    if (t.tag == Parameter::h) out.h = state.h + s;
    if (t.tag == Parameter::omega) out.omega = state.omega + s;
    out.err = std::numeric_limits<double>::quiet_NaN();
    out.err_w = std::numeric_limits<double>::quiet_NaN();
    return out;
}

double first_harmonic_phase(const TorusState& state, int component) {
    const auto& c = state.K[0][component].coeffs();
    if (c.size() < 2 || std::abs(c[1]) == 0.0) throw DegenerateError("first harmonic vanishes, phase undefined");
    return std::arg(c[1]) / (2 * std::numbers::pi);
}

TorusState phase_align(const TorusState& state, int component) {
    const double delta = -first_harmonic_phase(state, component);
    TorusState out = state;
    for (int i = 0; i < state.m; ++i) {
        out.K[i] = rotate(state.K[i], delta);
        out.W[i] = rotate(state.W[i], delta);
    }
    return out;
}

TangentData phase_align(const TorusState& state, const TangentData& t, int component) {
    const auto& c = state.K[0][component].coeffs();
    const auto& dc = t.dK[0][component].coeffs();
    if (c.size() < 2 || std::abs(c[1]) == 0.0) throw DegenerateError("first harmonic vanishes, phase undefined");
    const double kappa = -std::imag(dc[1] / c[1]) / (2 * std::numbers::pi);
    TangentData out = t;
    for (int i = 0; i < state.m; ++i) {
        out.dK[i] = t.dK[i] + kappa * derivative(state.K[i]);
        out.dW[i] = t.dW[i] + kappa * derivative(state.W[i]);
    }
    return out;
}

double nobilize(double x, double tol) {
    const double phi = (1 + std::sqrt(5.0)) / 2;
    // Convergents p_k / q_k of x; the noble candidate is [a_0; a_1, ..., a_k, 1, 1, ...].
    double p_prev = 1, q_prev = 0;
    double p = std::floor(x), q = 1;
    double rest = x - std::floor(x);
    for (int k = 0; k < 40; ++k) {
        const double cand = (p * phi + p_prev) / (q * phi + q_prev);
        if (std::abs(cand - x) <= tol) return cand;
        if (rest < 1e-15) break;
        const double inv = 1 / rest;
        const double a = std::floor(inv);
        rest = inv - a;
        const double pn = a * p + p_prev, qn = a * q + q_prev;
        p_prev = p;
        q_prev = q;
        p = pn;
        q = qn;
    }
    return x;
}

void ContinuationConfig::validate() const {
    if (!(eps2 < eps1 && eps1 < eps)) throw ConfigError("tolerances must satisfy eps2 < eps1 < eps");
    if (!(eps_w > 0)) throw ConfigError("eps_w must be positive");
    if (!(alpha > 0) || !(alpha_min > 0) || alpha_min > alpha_max) throw ConfigError("invalid step size bounds");
    if (n_des < 1 || n_alpha < 0) throw ConfigError("n_des must be positive and n_alpha nonnegative");
    if (n_min < 4 || n_max < n_min) throw ConfigError("invalid N limits");
    if (max_iters < 1) throw ConfigError("max_iters must be positive");
    if (max_tori < 1) throw ConfigError("max_tori must be positive");
    if (!(calabi_floor >= 0)) throw ConfigError("calabi_floor must be nonnegative");
    if (halving_gate > eps1) throw ConfigError("halving_gate must not exceed eps1");
}

RefineConfig ContinuationConfig::refine_config(double eps_torus) const {
    RefineConfig rc;
    rc.eps = eps_torus;
    rc.eps_w = eps_w;
    rc.max_iters = max_iters;
    rc.mode = tag == Parameter::T ? NewtonMode::isochronous : NewtonMode::isoenergetic;
    rc.integrator = integrator;
    rc.frame = frame;
    rc.newton = newton;
    rc.newton.tail_cutoff = tail_cutoff;
    return rc;
}

namespace {

std::string fmt(const char* what, double v) {
    std::ostringstream os;
    os.precision(6);
    os << what << v;
    return os.str();
}

}  // namespace

StepOutcome continuation_step(const HamiltonianModel& model, const TorusState& state, double alpha,
                              const ContinuationConfig& cfg) {
    cfg.validate();
    StepOutcome out;
    TorusState base = state;
    TangentOptions topt{cfg.newton, cfg.integrator};
    topt.newton.tail_cutoff = cfg.tail_cutoff;

    for (;;) {
        if (alpha < cfg.alpha_min)
            throw NoConvergenceError("step size fell below " + std::to_string(cfg.alpha_min));
        const AdaptedFrame frame = build_frame(model, base, cfg.integrator, cfg.frame);
        const TangentData t = tangent(model, base, frame, cfg.tag, topt);
        const double tnorm = tangent_norm(t);

        // Step 3: predictor and corrector, halving alpha up to n_alpha times.
        bool ok = false;
        TorusState next;
        double a = alpha;
        int iters = 0;
        for (int k = 0; k <= cfg.n_alpha && a >= cfg.alpha_min; ++k, a /= 2) {
            double a_eff = a;
            if (cfg.tag == Parameter::omega && cfg.nobilize_tol > 0) {
                const double target = nobilize(base.omega + a / tnorm, cfg.nobilize_tol);
                a_eff = (target - base.omega) * tnorm;
            }
            TorusState pred = predictor(base, t, a_eff);
            if (cfg.tag == Parameter::omega && cfg.nobilize_tol > 0)
                pred.omega = nobilize(base.omega + a / tnorm, cfg.nobilize_tol);
            try {
                RefineReport rep;
                next = refine(model, pred, cfg.refine_config(cfg.eps), &rep);
                iters = rep.iterations;
                ok = true;
                out.alpha_used = a;
                break;
            } catch (const NumericalError& e) {
                out.log.push_back(fmt("corrector failed at alpha=", a) + ": " + e.what());
                ++out.alpha_halvings;
            }
        }
        if (!ok) {
            const int n2 = 2 * base.N();
            if (n2 > cfg.n_max) throw NoConvergenceError("N limit reached after step size halvings");
            base = resample_state(base, n2, cfg.tail_cutoff);
            ++out.n_doublings;
            out.log.push_back("restart with N=" + std::to_string(n2));
            continue;
        }

        const double gate = cfg.halving_gate > 0 ? cfg.halving_gate : cfg.eps1;
        auto shrink = [&] {
            while (next.err <= gate && next.N() / 2 >= cfg.n_min) {
                TorusState smaller = resample_state(next, next.N() / 2, cfg.tail_cutoff);
                const double e = torus_error(model, smaller, cfg.integrator).err;
                if (!(e <= cfg.eps1)) break;
                smaller.err = e;
                smaller.err_w = bundle_error(model, smaller, cfg.integrator);
                next = std::move(smaller);
                ++out.n_halvings;
                out.log.push_back("halved N to " + std::to_string(next.N()));
            }
        };
        // Step 4: shrink N while the error allows it.
        if (next.err <= gate) {
            shrink();
        } else if (next.err > cfg.eps1) {
            // Step 5: double N (refine in place at the cap) and refine to eps1.
            const int base_n = next.N();
            const int n2 = std::min(2 * base_n, std::max(cfg.n_max, base_n));
            bool refined = false;
            try {
                RefineReport rep;
                TorusState start = n2 > next.N() ? resample_state(next, n2, cfg.tail_cutoff) : next;
                next = refine(model, start, cfg.refine_config(cfg.eps1), &rep);
                if (n2 > base_n) ++out.n_doublings;
                out.log.push_back("refined to eps1 at N=" + std::to_string(n2));
                refined = true;
            } catch (const NumericalError& e) {
                out.log.push_back(std::string("refinement to eps1 failed: ") + e.what());
            }
            if (!refined) {
                alpha /= 2;
                ++out.alpha_halvings;
                out.log.push_back(fmt("restart with alpha=", alpha));
                continue;
            }
            // The refined torus may fit in fewer samples again.
            shrink();
        }

        // Step 6: accept.
        out.state = canonicalize(next);
        out.newton_iterations = iters;
        out.alpha_next = std::clamp(out.alpha_used * cfg.n_des / std::max(iters, 1), cfg.alpha_min, cfg.alpha_max);
        return out;
    }
}

FamilyResult run_family(const HamiltonianModel& model, const TorusState& start, const ContinuationConfig& cfg,
                        const FamilySink& sink, int first_index, double alpha, bool emit_start) {
    cfg.validate();
    FamilyResult res;
    double a = alpha > 0 ? alpha : cfg.alpha;
    TorusState state = start;

    auto emit = [&](FamilyEntry&& e) {
        ++res.accepted;
        const bool go = sink ? sink(e) : true;
        if (!sink) res.entries.push_back(std::move(e));
        return go;
    };
    auto param_of = [&](const TorusState& s) {
        return cfg.tag == Parameter::T ? s.T : cfg.tag == Parameter::h ? s.h : s.omega;
    };

    ObservableRecord obs = compute_observables(model, state, cfg.observables);
    bool armed = std::abs(obs.c1) > cfg.calabi_floor;
    if (emit_start) {
        FamilyEntry e{first_index, state, obs, 0, a, 0};
        if (!emit(std::move(e))) {
            res.stop_reason = "stopped by sink";
            return res;
        }
    }

    for (int idx = first_index + 1; idx < cfg.max_tori; ++idx) {
        StepOutcome so;
        try {
            so = continuation_step(model, state, a, cfg);
        } catch (const NoConvergenceError& e) {
            res.stop_reason = "budget exhausted after torus " + std::to_string(idx - 1) + ": " + e.what();
            return res;
        } catch (const NumericalError& e) {
            throw NumericalError("family step " + std::to_string(idx) + ": " + e.what());
        }
        state = std::move(so.state);
        a = so.alpha_next;
        obs = compute_observables(model, state, cfg.observables);
        FamilyEntry e{idx, state, obs, so.alpha_used, so.alpha_next, so.newton_iterations};
        if (!emit(std::move(e))) {
            res.stop_reason = "stopped by sink";
            return res;
        }
        const double p = param_of(state);
        if (p < cfg.param_min || p > cfg.param_max) {
            res.stop_reason = "parameter bound reached";
            return res;
        }
        if (armed && std::abs(obs.c1) < cfg.calabi_floor) {
            res.stop_reason = "Calabi floor reached";
            return res;
        }
        if (std::abs(obs.c1) > cfg.calabi_floor) armed = true;
    }
    res.stop_reason = "maximum number of tori";
    return res;
}

}  // namespace phtori

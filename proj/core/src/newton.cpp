#include "phtori/newton.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "grid_util.hpp"
#include "phtori/errors.hpp"

namespace phtori {

using detail::column_function;

std::string to_string(NewtonMode mode) {
    return mode == NewtonMode::isochronous ? "isochronous" : "isoenergetic";
}

namespace {

std::vector<PeriodicFunction> component(const std::vector<Mat>& per_leg, int c) {
    std::vector<PeriodicFunction> out;
    out.reserve(per_leg.size());
    for (const auto& s : per_leg) out.push_back(column_function(s, c));
    return out;
}

void store(std::vector<Mat>& per_leg, int c, const std::vector<PeriodicFunction>& f) {
    for (std::size_t i = 0; i < per_leg.size(); ++i)
        for (int j = 0; j < f[i].size(); ++j) per_leg[i](j, c) = f[i][j];
}

std::vector<PeriodicFunction> scaled(std::vector<PeriodicFunction> f, double s) {
    for (auto& g : f) g *= s;
    return f;
}

double condition_number(const Mat& a) {
    Eigen::JacobiSVD<Mat> svd(a);
    const auto& sv = svd.singularValues();
    const double lo = sv(sv.size() - 1);
    return lo == 0.0 ? std::numeric_limits<double>::infinity() : sv(0) / lo;
}

void check_eta(const AdaptedFrame& fr, const std::vector<Mat>& eta) {
    if (static_cast<int>(eta.size()) != fr.m) throw std::invalid_argument("one right-hand side per leg");
    for (const auto& e : eta)
        if (e.rows() != fr.N || e.cols() != fr.dim()) throw std::invalid_argument("right-hand side shape");
}

}  // namespace

std::vector<Mat> frame_coordinates(const AdaptedFrame& frame, const std::vector<Mat>& errors) {
    std::vector<Mat> out(frame.m);
    for (int i = 0; i < frame.m; ++i) {
        out[i].resize(frame.N, frame.dim());
        for (int j = 0; j < frame.N; ++j)
            out[i].row(j) = -(symplectic_inverse(frame.P_next[i][j]) * errors[i].row(j).transpose()).transpose();
    }
    return out;
}

std::vector<Mat> apply_frame(const AdaptedFrame& frame, const std::vector<Mat>& xi) {
    std::vector<Mat> out(frame.m);
    for (int i = 0; i < frame.m; ++i) {
        out[i].resize(frame.N, frame.dim());
        for (int j = 0; j < frame.N; ++j) out[i].row(j) = (frame.P[i][j] * xi[i].row(j).transpose()).transpose();
    }
    return out;
}

TorusCorrection solve_torus_system(const AdaptedFrame& fr, const std::vector<Mat>& eta, NewtonMode mode,
                                   double energy_rhs, const NewtonOptions& opt) {
    check_eta(fr, eta);
    const int n = fr.n, m = fr.m, N = fr.N;
    const double lam = fr.lambda;
    const auto& copt = opt.cohomology;

    TorusCorrection out;
    out.xi.assign(m, Mat::Zero(N, 2 * n));

    store(out.xi, n - 1, solve_multiple_non_small_divisor(component(eta, n - 1), fr.omega, lam, 1.0, copt));
    store(out.xi, 2 * n - 1,
          solve_multiple_non_small_divisor(component(eta, 2 * n - 1), fr.omega, 1.0 / lam, 1.0, copt));

    out.eta3_mean.resize(n - 1);
    for (int c = 0; c < n - 1; ++c) {
        auto sol = solve_multiple_small_divisor(component(eta, n + c), fr.omega, copt);
        out.eta3_mean[c] = sol.avg;
        store(out.xi, n + c, sol.xi);
    }

    // Averaged first block: <S^1> xi3_00 + e dtau = <eta^1 - S^1 xi3bar>.
    Vec rhs = Vec::Zero(n - 1);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < N; ++j) {
            const Vec xi3 = out.xi[i].row(j).segment(n, n - 1).transpose();
            rhs += eta[i].row(j).head(n - 1).transpose() - fr.S1[i][j] * xi3;
        }
    rhs /= static_cast<double>(m) * N;

    Vec x;
    if (mode == NewtonMode::isochronous) {
        out.twist = fr.S1_mean;
        out.twist_condition = condition_number(out.twist);
        if (!(out.twist_condition <= opt.twist_limit))
            throw TwistError("isochronous twist condition fails", out.twist_condition);
        x = out.twist.fullPivLu().solve(rhs);
    } else {
        Mat a = Mat::Zero(n, n);
        a.topLeftCorner(n - 1, n - 1) = fr.S1_mean;
        a(n - 2, n - 1) = 1.0;
        a(n - 1, n - 2) = 1.0;
        out.twist = a;
        out.twist_condition = condition_number(a);
        if (!(out.twist_condition <= opt.twist_limit))
            throw TwistError("isoenergetic twist condition fails", out.twist_condition);
        Vec b(n);
        b.head(n - 1) = rhs;
        b(n - 1) = energy_rhs;
        const Vec sol = a.fullPivLu().solve(b);
        x = sol.head(n - 1);
        out.dtau = sol(n - 1);
    }
    out.xi3_mean = x;

    std::vector<Mat> rhs1(m, Mat::Zero(N, n - 1));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < N; ++j) {
            Vec xi3 = out.xi[i].row(j).segment(n, n - 1).transpose() + x;
            out.xi[i].row(j).segment(n, n - 1) = xi3.transpose();
            Vec r = eta[i].row(j).head(n - 1).transpose() - fr.S1[i][j] * xi3;
            r(n - 2) -= out.dtau;
            rhs1[i].row(j) = r.transpose();
        }
    for (int c = 0; c < n - 1; ++c) store(out.xi, c, solve_multiple_small_divisor(component(rhs1, c), fr.omega, copt).xi);
    return out;
}

BundleCorrection solve_bundle_system(const AdaptedFrame& fr, const std::vector<Mat>& eta, const NewtonOptions& opt) {
    check_eta(fr, eta);
    const int n = fr.n, m = fr.m, N = fr.N;
    const double lam = fr.lambda;
    const auto& copt = opt.cohomology;

    BundleCorrection out;
    out.xi.assign(m, Mat::Zero(N, 2 * n));
    for (int c = 0; c < n - 1; ++c)
        store(out.xi, n + c, solve_multiple_non_small_divisor(component(eta, n + c), fr.omega, 1.0, lam, copt));
    store(out.xi, 2 * n - 1,
          solve_multiple_non_small_divisor(component(eta, 2 * n - 1), fr.omega, 1.0 / lam, lam, copt));

    std::vector<Mat> rhs1(m, Mat::Zero(N, n - 1));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < N; ++j) {
            const Vec xi3 = out.xi[i].row(j).segment(n, n - 1).transpose();
            rhs1[i].row(j) = (eta[i].row(j).head(n - 1).transpose() - fr.S1[i][j] * xi3).transpose();
        }
    for (int c = 0; c < n - 1; ++c)
        store(out.xi, c, solve_multiple_non_small_divisor(component(rhs1, c), fr.omega, 1.0, lam, copt));

    auto sol2 = solve_multiple_small_divisor(scaled(component(eta, n - 1), 1.0 / lam), fr.omega, copt);
    out.dlambda = -sol2.avg * lam;
    store(out.xi, n - 1, sol2.xi);
    return out;
}

StepResult newton_torus_step(const HamiltonianModel& model, const TorusState& state, const AdaptedFrame& frame,
                             NewtonMode mode, const NewtonOptions& opt) {
    StepResult out{state, {}};
    auto& rep = out.report;
    rep.err_before = frame.err;
    rep.energy_error = mean_energy(model, state.K[0]) - state.h;

    const auto corr = solve_torus_system(frame, frame_coordinates(frame, frame.E), mode, -rep.energy_error, opt);
    const auto dk = apply_frame(frame, corr.xi);
    for (int i = 0; i < state.m; ++i)
        out.state.K[i] = clean_tail(CurveMap::from_samples(state.K[i].samples() + dk[i]), opt.tail_cutoff);
    if (mode == NewtonMode::isoenergetic) {
        rep.dtau = corr.dtau;
        out.state.T = state.T + state.m * corr.dtau;
    } else {
        rep.dh = rep.energy_error + corr.xi3_mean(state.n - 2);
    }
    rep.twist = corr.twist;
    rep.twist_condition = corr.twist_condition;
    rep.eta3_mean = corr.eta3_mean;
    out.state.err = std::numeric_limits<double>::quiet_NaN();
    return out;
}

StepResult newton_bundle_step(const HamiltonianModel& model, const TorusState& state, const AdaptedFrame& frame,
                              const NewtonOptions& opt) {
    (void)model;
    StepResult out{state, {}};
    out.report.err_before = frame.err_w;
    const auto corr = solve_bundle_system(frame, frame_coordinates(frame, frame.EW), opt);
    const auto dw = apply_frame(frame, corr.xi);
    for (int i = 0; i < state.m; ++i)
        out.state.W[i] = clean_tail(CurveMap::from_samples(state.W[i].samples() + dw[i]), opt.tail_cutoff);
    out.state.lambda = state.lambda + corr.dlambda;
    out.report.dlambda = corr.dlambda;
    out.state.err_w = std::numeric_limits<double>::quiet_NaN();
    return out;
}

double bundle_error(const HamiltonianModel& model, const TorusState& state, const IntegratorConfig& cfg) {
    state.validate();
    double err = 0;
    for (int i = 0; i < state.m; ++i) {
        GridFlowRequest req;
        const Mat ws = state.W[i].samples();
        req.columns.resize(state.N());
        for (int j = 0; j < state.N(); ++j) req.columns[j] = ws.row(j).transpose();
        const auto r = flow_grid(model, state.K[i].samples(), state.T / state.m, req, cfg);
        const Mat wnext = rotate(state.W[(i + 1) % state.m], state.omega / state.m).samples();
        for (int j = 0; j < state.N(); ++j)
            err = std::max(err, (r.applied[j].col(0) - state.lambda * wnext.row(j).transpose()).cwiseAbs().maxCoeff());
    }
    return err;
}

TorusState refine(const HamiltonianModel& model, const TorusState& input, const RefineConfig& cfg,
                  RefineReport* report) {
    RefineReport local;
    RefineReport& rep = report ? *report : local;
    rep = RefineReport{};

    TorusState state = input;
    LegFlow flow = flow_legs(model, state, cfg.integrator);
    double first_err = -1;
    for (int k = 0; k < cfg.bundle_presteps; ++k) {
        const AdaptedFrame frame = build_frame(model, state, flow, cfg.frame);
        if (!(frame.err_w > 10 * frame.err) || frame.err_w < cfg.eps_w) break;
        state = newton_bundle_step(model, state, frame, cfg.newton).state;
        ++rep.bundle_presteps;
    }
    for (int it = 0;; ++it) {
        const AdaptedFrame frame = build_frame(model, state, flow, cfg.frame);
        rep.err_history.push_back(frame.err);
        rep.err_w_history.push_back(frame.err_w);
        if (!std::isfinite(frame.err) || !std::isfinite(frame.err_w))
            throw NoConvergenceError("non-finite invariance error after " + std::to_string(it) + " iteration(s)");
        // In isoenergetic mode the energy condition is part of the system.
        const double energy_gap = cfg.mode == NewtonMode::isoenergetic
                                      ? std::abs(mean_energy(model, state.K[0]) - state.h)
                                      : 0.0;
        if (frame.err < cfg.eps && frame.err_w < cfg.eps_w && energy_gap < cfg.eps) {
            rep.converged = true;
            break;
        }
        if (first_err < 0) first_err = std::max({frame.err, energy_gap, cfg.eps});
        if (frame.err > cfg.divergence_factor * first_err)
            throw NoConvergenceError("Newton iteration diverges (err " + std::to_string(frame.err) + ")");
        if (it >= cfg.max_iters)
            throw NoConvergenceError("no convergence in " + std::to_string(cfg.max_iters) +
                                     " iterations (err " + std::to_string(frame.err) + ", errW " +
                                     std::to_string(frame.err_w) + ")");

        auto torus = newton_torus_step(model, state, frame, cfg.mode, cfg.newton);
        state = std::move(torus.state);
        flow = flow_legs(model, state, cfg.integrator);
        const AdaptedFrame frame2 = build_frame(model, state, flow, cfg.frame);
        auto bundle = newton_bundle_step(model, state, frame2, cfg.newton);
        state = std::move(bundle.state);
        torus.report.err_after = frame2.err;
        torus.report.dlambda = bundle.report.dlambda;
        rep.steps.push_back(torus.report);
        ++rep.iterations;
    }

    if (cfg.mode == NewtonMode::isochronous) state.h = mean_energy(model, state.K[0]);
    state.err = torus_error(model, state, cfg.integrator).err;
    state.err_w = bundle_error(model, state, cfg.integrator);
    return state;
}

}  // namespace phtori

#include "phtori/frame.hpp"

#include <algorithm>
#include <cmath>

#include "grid_util.hpp"
#include "phtori/errors.hpp"

namespace phtori {

using detail::entry_function;
using detail::rotate_matrices;

namespace {

Mat standard_omega(int n) { return SymplecticStructure(n).omega(); }

double max_abs(const Mat& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

// Solves a family of scalar multiple cohomological equations, one per matrix entry,
// and writes the solutions back into per-point matrices.
template <class Solve>
void solve_entries(const std::vector<std::vector<Mat>>& rhs, int r0, int c0, int rows, int cols,
                   std::vector<std::vector<Mat>>& out, Solve&& solve) {
    const int m = static_cast<int>(rhs.size());
    const int n_grid = static_cast<int>(rhs.front().size());
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            std::vector<PeriodicFunction> etas;
            etas.reserve(m);
            for (int i = 0; i < m; ++i) etas.push_back(entry_function(rhs[i], r0 + r, c0 + c));
            const std::vector<PeriodicFunction> xi = solve(etas);
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < n_grid; ++j) out[i][j](r0 + r, c0 + c) = xi[i][j];
        }
}

}  // namespace

LegFlow flow_legs(const HamiltonianModel& model, const TorusState& state, const IntegratorConfig& cfg) {
    state.validate();
    LegFlow out;
    out.endpoints.resize(state.m);
    out.jacobians.resize(state.m);
    const int d = state.dim();
    GridFlowRequest req;
    req.columns.assign(state.N(), Mat::Identity(d, d));
    for (int i = 0; i < state.m; ++i) {
        auto r = flow_grid(model, state.K[i].samples(), state.T / state.m, req, cfg);
        out.endpoints[i] = std::move(r.endpoints);
        out.jacobians[i] = std::move(r.applied);
        out.stats.steps += r.stats.steps;
        out.stats.rejected += r.stats.rejected;
    }
    return out;
}

Mat symplectic_inverse(const Mat& p) {
    const Mat om = standard_omega(static_cast<int>(p.rows()) / 2);
    return -om * p.transpose() * om;
}

AdaptedFrame build_frame(const HamiltonianModel& model, const TorusState& state, const IntegratorConfig& cfg,
                         const FrameOptions& opt) {
    return build_frame(model, state, flow_legs(model, state, cfg), opt);
}

AdaptedFrame build_frame(const HamiltonianModel& model, const TorusState& state, const LegFlow& flow,
                         const FrameOptions& opt) {
    state.validate();
    if (state.n != 3) throw ConfigError("frames are implemented for one-dimensional generators (n = 3)");
    const int n = state.n, m = state.m, N = state.N(), d = 2 * n;
    const double lam = state.lambda;
    const double step = state.omega / m;
    if (lam == 0.0 || std::abs(std::abs(lam) - 1.0) < 1e-6)
        throw DegenerateError("bundle multiplier too close to the unit circle");

    const SymplecticStructure& st = model.structure();
    const Mat om = st.omega();
    const Mat jc = st.almost_complex();
    const Mat gm = st.metric();

    AdaptedFrame fr;
    fr.n = n;
    fr.m = m;
    fr.N = N;
    fr.omega = state.omega;
    fr.lambda = lam;
    fr.constant_torsion = opt.constant_torsion;
    fr.jacobians = flow.jacobians;

    // Steps 1 and 2: Lagrangian subframe and its complement.
    std::vector<std::vector<Mat>> L(m), Nh(m);
    std::vector<Mat> Ws(m), dK(m);
    double dk_sq = 0;
    for (int i = 0; i < m; ++i) {
        dK[i] = derivative(state.K[i]).samples();
        dk_sq += dK[i].squaredNorm();
    }
    fr.tangent_scale = opt.normalize_tangent ? std::sqrt(dk_sq / (static_cast<double>(m) * N)) : 1.0;
    if (!(fr.tangent_scale > 0)) throw DegenerateError("torus has no tangent direction");
    // L and its complement at the points (K, K', W), all given as N x d samples.
    auto subframes = [&](const Mat& ks, const Mat& dks, const Mat& ws, int leg, std::vector<Mat>& lo,
                         std::vector<Mat>& no) {
        lo.resize(N);
        no.resize(N);
        for (int j = 0; j < N; ++j) {
            Mat l(d, n);
            l.col(0) = dks.row(j).transpose() / fr.tangent_scale;
            l.col(1) = model.vector_field(Vec(ks.row(j).transpose()));
            l.col(2) = ws.row(j).transpose();
            const Mat g = l.transpose() * gm * l;
            Eigen::LDLT<Mat> ldlt(g);
            if (ldlt.info() != Eigen::Success || !(std::abs(ldlt.vectorD().minCoeff()) > 0.0))
                throw DegenerateError("singular subframe metric at leg " + std::to_string(leg) + ", point " +
                                      std::to_string(j));
            no[j] = jc * l * ldlt.solve(Mat::Identity(n, n));
            lo[j] = std::move(l);
        }
    };
    // The same objects at theta + omega/m on the next leg; only the band-limited
    // inputs are interpolated.
    std::vector<std::vector<Mat>> Ln(m), Nn(m);
    for (int i = 0; i < m; ++i) {
        Ws[i] = state.W[i].samples();
        subframes(state.K[i].samples(), dK[i], Ws[i], i, L[i], Nh[i]);
        const int nx = (i + 1) % m;
        subframes(rotate(state.K[nx], step).samples(), rotate_samples(dK[nx], step),
                  rotate(state.W[nx], step).samples(), nx, Ln[i], Nn[i]);
    }

    // Step 3: torsion of the first reduction.
    std::vector<std::vector<Mat>> Sh(m);
    for (int i = 0; i < m; ++i) {
        const std::vector<Mat>& nnext = Nn[i];
        Sh[i].resize(N);
        for (int j = 0; j < N; ++j) {
            Mat s = nnext[j].transpose() * om * flow.jacobians[i][j] * Nh[i][j];
            // S^1 symmetric and S^3 = lambda S^2^T in exact arithmetic.
            const Mat s1 = s.topLeftCorner(n - 1, n - 1);
            fr.raw_torsion_asymmetry = std::max(fr.raw_torsion_asymmetry, max_abs(s1 - s1.transpose()));
            s.topLeftCorner(n - 1, n - 1) = 0.5 * (s1 + s1.transpose());
            const Vec s2 = 0.5 * (s.topRightCorner(n - 1, 1) + s.bottomLeftCorner(1, n - 1).transpose() / lam);
            s.topRightCorner(n - 1, 1) = s2;
            s.bottomLeftCorner(1, n - 1) = lam * s2.transpose();
            Sh[i][j] = std::move(s);
        }
    }

    // Steps 4 to 6: symmetric correction B_i.
    std::vector<std::vector<Mat>> rhs(m, std::vector<Mat>(N)), B(m, std::vector<Mat>(N, Mat::Zero(n, n)));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < N; ++j) rhs[i][j] = -Sh[i][j];
    const auto& copt = opt.cohomology;
    solve_entries(rhs, 0, n - 1, n - 1, 1, B, [&](const std::vector<PeriodicFunction>& etas) {
        return solve_multiple_non_small_divisor(etas, state.omega, 1.0, 1.0 / lam, copt);
    });
    solve_entries(rhs, n - 1, n - 1, 1, 1, B, [&](const std::vector<PeriodicFunction>& etas) {
        return solve_multiple_non_small_divisor(etas, state.omega, lam, 1.0 / lam, copt);
    });

    Mat s1_hat_mean = Mat::Zero(n - 1, n - 1);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < N; ++j) s1_hat_mean += Sh[i][j].topLeftCorner(n - 1, n - 1);
    s1_hat_mean /= static_cast<double>(m) * N;

    if (opt.constant_torsion) {
        std::vector<std::vector<Mat>> r1(m, std::vector<Mat>(N));
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < N; ++j) r1[i][j] = s1_hat_mean - Sh[i][j].topLeftCorner(n - 1, n - 1);
        std::vector<std::vector<Mat>> b1(m, std::vector<Mat>(N, Mat::Zero(n - 1, n - 1)));
        for (int r = 0; r < n - 1; ++r)
            for (int c = r; c < n - 1; ++c) {
                std::vector<PeriodicFunction> etas;
                for (int i = 0; i < m; ++i) etas.push_back(entry_function(r1[i], r, c));
                const auto sol = solve_multiple_small_divisor(etas, state.omega, copt);
                for (int i = 0; i < m; ++i)
                    for (int j = 0; j < N; ++j) {
                        const double v = sol.xi[i][j] + (r == c ? 1.0 : 0.0);
                        b1[i][j](r, c) = v;
                        b1[i][j](c, r) = v;
                    }
            }
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < N; ++j) B[i][j].topLeftCorner(n - 1, n - 1) = b1[i][j];
    } else {
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < N; ++j) B[i][j].topLeftCorner(n - 1, n - 1).setIdentity();
    }
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < N; ++j) B[i][j].bottomLeftCorner(1, n - 1) = B[i][j].topRightCorner(n - 1, 1).transpose();

    // Step 7: the frame, its shifted copy and the torsion blocks.
    fr.P.resize(m);
    for (int i = 0; i < m; ++i) {
        fr.P[i].resize(N);
        for (int j = 0; j < N; ++j) {
            Mat p(d, d);
            p.leftCols(n) = L[i][j];
            p.rightCols(n) = L[i][j] * B[i][j] + Nh[i][j];
            fr.P[i][j] = std::move(p);
        }
    }
    fr.P_next.resize(m);
    fr.S1.resize(m);
    fr.S1_mean = Mat::Zero(n - 1, n - 1);
    for (int i = 0; i < m; ++i) {
        const std::vector<Mat> b_next = rotate_matrices(B[(i + 1) % m], step);
        fr.P_next[i].resize(N);
        for (int j = 0; j < N; ++j) {
            Mat p(d, d);
            p.leftCols(n) = Ln[i][j];
            p.rightCols(n) = Ln[i][j] * b_next[j] + Nn[i][j];
            fr.P_next[i][j] = std::move(p);
        }
        std::vector<Mat> b1_next;
        if (opt.constant_torsion)
            for (int j = 0; j < N; ++j) b1_next.push_back(b_next[j].topLeftCorner(n - 1, n - 1));
        fr.S1[i].resize(N);
        for (int j = 0; j < N; ++j) {
            Mat s1 = Sh[i][j].topLeftCorner(n - 1, n - 1);
            if (opt.constant_torsion) s1 += B[i][j].topLeftCorner(n - 1, n - 1) - b1_next[j];
            fr.S1_mean += s1;
            fr.S1[i][j] = std::move(s1);
        }
    }
    fr.S1_mean /= static_cast<double>(m) * N;
    fr.S1_mean = 0.5 * (fr.S1_mean + fr.S1_mean.transpose()).eval();

    // Invariance errors seen by this flow.
    fr.E.resize(m);
    fr.EW.resize(m);
    for (int i = 0; i < m; ++i) {
        const int nx = (i + 1) % m;
        const Mat knext = rotate(state.K[nx], step).samples();
        const Mat wnext = rotate(state.W[nx], step).samples();
        fr.E[i] = flow.endpoints[i] - knext;
        Mat ew(N, d);
        for (int j = 0; j < N; ++j)
            ew.row(j) = (flow.jacobians[i][j] * Ws[i].row(j).transpose() - lam * wnext.row(j).transpose()).transpose();
        fr.EW[i] = std::move(ew);
        fr.err = std::max(fr.err, max_abs(fr.E[i]));
        fr.err_w = std::max(fr.err_w, max_abs(fr.EW[i]));
    }
    return fr;
}

Mat mean_torsion(const AdaptedFrame& frame) { return frame.S1_mean; }

FrameQuality frame_quality(const AdaptedFrame& fr) {
    FrameQuality q;
    const int n = fr.n, d = 2 * n;
    const Mat om = standard_omega(n);
    Mat lam_block = Mat::Identity(n, n);
    lam_block(n - 1, n - 1) = fr.lambda;
    Mat lam_inv_t = Mat::Identity(n, n);
    lam_inv_t(n - 1, n - 1) = 1.0 / fr.lambda;
    for (int i = 0; i < fr.m; ++i)
        for (int j = 0; j < fr.N; ++j) {
            const Mat& p = fr.P[i][j];
            Mat reduced = Mat::Zero(d, d);
            reduced.topLeftCorner(n, n) = lam_block;
            reduced.bottomRightCorner(n, n) = lam_inv_t;
            reduced.block(0, n, n - 1, n - 1) = fr.S1[i][j];
            const Mat red = symplectic_inverse(fr.P_next[i][j]) * fr.jacobians[i][j] * p;
            q.reduction_residual = std::max(q.reduction_residual, max_abs(red - reduced));
            q.symplecticity_defect = std::max(q.symplecticity_defect, max_abs(p.transpose() * om * p - om));
            q.torsion_symmetry = std::max({q.torsion_symmetry, fr.raw_torsion_asymmetry,
                                           max_abs(fr.S1[i][j] - fr.S1[i][j].transpose())});
            const Mat l = p.leftCols(n);
            q.lagrangian_defect = std::max(q.lagrangian_defect, max_abs(l.transpose() * om * l));
            q.torsion_spread = std::max(q.torsion_spread, max_abs(fr.S1[i][j] - fr.S1_mean));
        }
    return q;
}

}  // namespace phtori

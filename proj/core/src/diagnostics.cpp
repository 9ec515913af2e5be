#include "phtori/diagnostics.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "phtori/errors.hpp"

namespace phtori {

std::vector<CurveMap> random_band_limited(int m, int N, int dim, int band, std::uint64_t seed) {
    if (band < 1 || 2 * band >= N) throw ConfigError("band must lie in [1, N/2)");
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal;
    std::vector<CurveMap> out;
    for (int i = 0; i < m; ++i) {
        Mat smp = Mat::Zero(N, dim);
        for (int c = 0; c < dim; ++c)
            for (int k = 1; k <= band; ++k) {
                const double a = normal(gen) / (k * k), b = normal(gen) / (k * k);
                for (int j = 0; j < N; ++j) {
                    const double x = 2 * std::numbers::pi * k * j / N;
                    smp(j, c) += a * std::cos(x) + b * std::sin(x);
                }
            }
        smp /= smp.cwiseAbs().maxCoeff();
        out.push_back(CurveMap::from_samples(smp));
    }
    return out;
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw ConfigError("slope needs at least two points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const double lx = std::log(x[k]), ly = std::log(y[k]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double den = n * sxx - sx * sx;
    if (den == 0) throw DegenerateError("repeated abscissae in slope fit");
    return (n * sxy - sx * sy) / den;
}

CancellationReport cancellation_scaling(const HamiltonianModel& model, const TorusState& state,
                                        const std::vector<double>& deltas, int band, std::uint64_t seed,
                                        const IntegratorConfig& cfg, const FrameOptions& fopt) {
    const auto noise = random_band_limited(state.m, state.N(), state.dim(), band, seed);
    CancellationReport rep;
    std::vector<double> xs, ys;
    for (double d : deltas) {
        TorusState p = state;
        for (int i = 0; i < state.m; ++i) p.K[i] = state.K[i] + d * noise[i];
        const AdaptedFrame frame = build_frame(model, p, cfg, fopt);
        NewtonOptions opt;
        opt.twist_limit = std::numeric_limits<double>::infinity();
        const TorusCorrection c =
            solve_torus_system(frame, frame_coordinates(frame, frame.E), NewtonMode::isochronous, 0.0, opt);
        CancellationPoint pt{d, frame.err, c.eta3_mean.cwiseAbs().maxCoeff()};
        rep.points.push_back(pt);
        xs.push_back(d);
        ys.push_back(pt.eta3_mean);
    }
    rep.slope = log_log_slope(xs, ys);
    return rep;
}

TwistReport twist_report(const AdaptedFrame& frame) {
    TwistReport r;
    NewtonOptions opt;
    opt.twist_limit = std::numeric_limits<double>::infinity();
    const std::vector<Mat> zero(frame.m, Mat::Zero(frame.N, 2 * frame.n));
    const TorusCorrection iso = solve_torus_system(frame, zero, NewtonMode::isochronous, 0.0, opt);
    r.isochronous = iso.twist;
    r.isochronous_det = iso.twist.determinant();
    r.isochronous_cond = iso.twist_condition;
    const TorusCorrection ien = solve_torus_system(frame, zero, NewtonMode::isoenergetic, 0.0, opt);
    r.bordered = ien.twist;
    r.bordered_det = ien.twist.determinant();
    r.bordered_cond = ien.twist_condition;
    return r;
}

}  // namespace phtori

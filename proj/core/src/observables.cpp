#include "phtori/observables.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>

#include "phtori/errors.hpp"

namespace phtori {

double calabi(const SymplecticStructure& structure, const CurveMap& k) {
    const Mat pts = k.samples();
    const Mat dks = derivative(k).samples();
    double sum = 0;
    for (Eigen::Index j = 0; j < pts.rows(); ++j) {
        const Vec z = pts.row(j).transpose();
        const Vec v = dks.row(j).transpose();
        sum += structure.action_apply(std::span<const double>(z.data(), z.size()),
                                      std::span<const double>(v.data(), v.size()));
    }
    return pts.rows() ? sum / static_cast<double>(pts.rows()) : 0.0;
}

CompanionCurve companion_curve(const HamiltonianModel& model, const TorusState& state, int n2,
                               const IntegratorConfig& cfg) {
    state.validate();
    if (n2 < 2) throw ConfigError("companion curve needs at least two samples");
    const int m = state.m, d = model.dim();
    CompanionCurve out;
    out.points.resize(n2, d);
    out.derivative.resize(n2, d);
    std::vector<CurveMap> dk(m);
    for (int i = 0; i < m; ++i) dk[i] = derivative(state.K[i]);
    parallel_for(n2, cfg.workers, [&](int q) {
        const double theta = static_cast<double>(q) / n2;
        const int j = std::min(static_cast<int>(std::floor(m * theta)), m - 1);
        const double s = theta - static_cast<double>(j) / m;
        const Vec z0 = state.K[j](-s * state.omega);
        Mat col(d, 1);
        col.col(0) = dk[j](-s * state.omega);
        const FlowResult r = flow_applied(model, z0, s * state.T, col, cfg);
        out.points.row(q) = r.endpoint.transpose();
        out.derivative.row(q) =
            (state.T * model.vector_field(r.endpoint) - state.omega * r.applied->col(0)).transpose();
    });
    return out;
}

CalabiPair calabi_2d(const HamiltonianModel& model, const TorusState& state, int n2, const IntegratorConfig& cfg) {
    const SymplecticStructure& st = model.structure();
    CalabiPair out;
    out.generator = calabi(st, state.K[0]);
    const CompanionCurve g = companion_curve(model, state, n2, cfg);
    double sum = 0;
    for (int q = 0; q < n2; ++q) {
        const Vec z = g.points.row(q).transpose();
        const Vec v = g.derivative.row(q).transpose();
        sum += st.action_apply(std::span<const double>(z.data(), z.size()), std::span<const double>(v.data(), v.size()));
    }
    out.companion = sum / n2;
    if (state.generator == Generator::vertical) {
        out.c1 = out.generator;
        out.c2 = -out.generator + out.companion;
    } else {
        out.c2 = -out.generator;
        out.c1 = out.generator + out.companion;
    }
    return out;
}

double subspace_distance(const Vec& u, const Mat& basis) {
    const double nu = u.norm();
    if (!(nu > 0)) throw DegenerateError("zero vector in bundle distance");
    const Vec e = u / nu;
    Eigen::HouseholderQR<Mat> qr(basis);
    const Mat q = qr.householderQ() * Mat::Identity(basis.rows(), basis.cols());
    const Vec rest = e - q * (q.transpose() * e);
    return std::min(1.0, rest.norm());
}

BundleDistances bundle_distances(const TorusState& state, const AdaptedFrame& frame) {
    const int n = frame.n;
    BundleDistances out{1, 1, 1, 1};
    for (int i = 0; i < frame.m; ++i)
        for (int j = 0; j < frame.N; ++j) {
            const Mat& p = frame.P[i][j];
            Mat center(p.rows(), 2 * n - 2);
            center << p.leftCols(n - 1), p.middleCols(n, n - 1);
            Eigen::ColPivHouseholderQR<Mat> rank(center);
            if (rank.rank() < center.cols()) throw DegenerateError("center subspace basis lost rank");
            const Vec stable = p.col(n - 1);
            const Vec unstable = p.col(2 * n - 1);
            out.tangent_field = std::min(out.tangent_field, subspace_distance(p.col(0), p.col(n - 2)));
            out.stable_unstable = std::min(out.stable_unstable, subspace_distance(stable, unstable));
            out.stable_center = std::min(out.stable_center, subspace_distance(stable, center));
            out.unstable_center = std::min(out.unstable_center, subspace_distance(unstable, center));
        }
    if (state.bundle == BundleKind::unstable) std::swap(out.stable_center, out.unstable_center);
    return out;
}

Frequencies natural_frequencies(const TorusState& state) {
    Frequencies f;
    if (state.generator == Generator::vertical) {
        f.omega_v = 1.0 / state.T;
        f.nu_v = state.omega;
        f.omega_p = f.omega_v * (1 + f.nu_v);
        f.nu_p = 1 - f.omega_v / f.omega_p;
    } else {
        f.omega_p = 1.0 / state.T;
        f.nu_p = state.omega;
        f.omega_v = f.omega_p * (1 - f.nu_p);
        f.nu_v = f.omega_p / f.omega_v - 1;
    }
    return f;
}

Surface globalize_surface(const HamiltonianModel& model, const TorusState& state, int n1, int n2,
                          const IntegratorConfig& cfg) {
    state.validate();
    if (n1 < 1 || n2 < 1) throw ConfigError("surface grid must be nonempty");
    const int m = state.m, d = model.dim();
    Surface s;
    s.n1 = n1;
    s.n2 = n2;
    s.points.resize(static_cast<Eigen::Index>(n1) * n2, d);
    parallel_for(n2, cfg.workers, [&](int i2) {
        const double t2 = static_cast<double>(i2) / n2;
        const int j = std::min(static_cast<int>(std::floor(m * t2)), m - 1);
        const double sft = t2 - static_cast<double>(j) / m;
        IntegratorConfig serial = cfg;
        serial.workers = 1;
        for (int i1 = 0; i1 < n1; ++i1) {
            const double t1 = static_cast<double>(i1) / n1;
            const Vec z0 = state.K[j](t1 - sft * state.omega);
            const Vec z = sft == 0.0 ? z0 : flow_point(model, z0, sft * state.T, serial).endpoint;
            s.points.row(static_cast<Eigen::Index>(i2) * n1 + i1) = z.transpose();
        }
    });
    s.generator1.resize(n1, d);
    for (int i1 = 0; i1 < n1; ++i1) s.generator1.row(i1) = state.K[0](static_cast<double>(i1) / n1).transpose();
    s.generator2 = companion_curve(model, state, n2, cfg).points;
    return s;
}

void write_surface(std::ostream& os, const TorusState& state, const Surface& surface) {
    os << std::setprecision(17);
    os << "# n1 n2 m N T omega h\n";
    os << surface.n1 << ' ' << surface.n2 << ' ' << state.m << ' ' << state.N() << ' ' << state.T << ' '
       << state.omega << ' ' << state.h << '\n';
    os << "# theta1 theta2 x1 x2 x3\n";
    for (int i2 = 0; i2 < surface.n2; ++i2)
        for (int i1 = 0; i1 < surface.n1; ++i1) {
            const auto row = surface.points.row(static_cast<Eigen::Index>(i2) * surface.n1 + i1);
            os << static_cast<double>(i1) / surface.n1 << ' ' << static_cast<double>(i2) / surface.n2 << ' '
               << row(0) << ' ' << row(1) << ' ' << row(2) << '\n';
        }
    os << "[generator theta2=0]\n";
    for (Eigen::Index q = 0; q < surface.generator1.rows(); ++q)
        os << surface.generator1(q, 0) << ' ' << surface.generator1(q, 1) << ' ' << surface.generator1(q, 2) << '\n';
    os << "[generator theta1=0]\n";
    for (Eigen::Index q = 0; q < surface.generator2.rows(); ++q)
        os << surface.generator2(q, 0) << ' ' << surface.generator2(q, 1) << ' ' << surface.generator2(q, 2) << '\n';
}

ObservableRecord compute_observables(const HamiltonianModel& model, const TorusState& state,
                                     const AdaptedFrame& frame, const ObservableOptions& opt) {
    ObservableRecord r;
    r.T = state.T;
    r.omega = state.omega;
    r.h = state.h;
    r.unstable_multiplier = unstable_multiplier(state);
    r.floquet_exponent = std::log(r.unstable_multiplier) / state.T;
    const CalabiPair c = calabi_2d(model, state, opt.n2, opt.integrator);
    r.c1 = c.c1;
    r.c2 = c.c2;
    r.r1 = std::sqrt(std::abs(c.c1) / std::numbers::pi);
    r.r2 = std::sqrt(std::abs(c.c2) / std::numbers::pi);
    r.distances = bundle_distances(state, frame);
    r.frequencies = natural_frequencies(state);
    r.N = state.N();
    r.m = state.m;
    return r;
}

ObservableRecord compute_observables(const HamiltonianModel& model, const TorusState& state,
                                     const ObservableOptions& opt) {
    return compute_observables(model, state, build_frame(model, state, opt.integrator), opt);
}

}  // namespace phtori

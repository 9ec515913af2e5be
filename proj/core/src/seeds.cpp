#include "phtori/seeds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "phtori/errors.hpp"

namespace phtori {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

struct Unknowns {
    double x1 = 0;
    double p2 = 0;
    double t_half = 0;
};

Vec start_state(Generator family, double amplitude, const Unknowns& u, double x_l1) {
    Vec z = Vec::Zero(6);
    if (family == Generator::vertical) {
        z[0] = u.x1;
        z[2] = amplitude;
    } else {
        z[0] = x_l1 - amplitude;
    }
    z[4] = u.p2;
    return z;
}

Unknowns linear_guess(const RtbpModel& model, Generator family, double amplitude) {
    const L1Point l1 = find_L1(model.params());
    const Vec eq = l1.state();
    const LinearSpectrum spec = linear_spectrum_at(model, eq);
    const Eigen::VectorXcd& u = family == Generator::vertical ? spec.vertical_vector : spec.planar_vector;
    const int k = family == Generator::vertical ? 2 : 0;
    const std::complex<double> c = (family == Generator::vertical ? amplitude : -amplitude) / u[k];
    const Vec z = eq + (c * u).real();
    const double freq = family == Generator::vertical ? spec.omega_v : spec.omega_p;
    return {z[0], z[4], 0.5 / freq};
}

// Newton on the half-period symmetry conditions.
Unknowns correct(const RtbpModel& model, Generator family, double amplitude, Unknowns u, double x_l1,
                 const PoConfig& cfg) {
    const bool vertical = family == Generator::vertical;
    for (int it = 0; it < cfg.max_iters; ++it) {
        const Vec z0 = start_state(family, amplitude, u, x_l1);
        const FlowResult r = flow_with_jacobian(model, z0, u.t_half, cfg.integrator);
        const Vec& z = r.endpoint;
        const Mat& dphi = *r.jacobian;
        const Vec xdot = model.vector_field(z);

        if (vertical) {
            Vec f(3);
            f << z[1], z[3], z[5];
            if (f.cwiseAbs().maxCoeff() < cfg.tol) return u;
            Mat a(3, 3);
            const int rows[3] = {1, 3, 5};
            for (int q = 0; q < 3; ++q) {
                a(q, 0) = dphi(rows[q], 0);
                a(q, 1) = dphi(rows[q], 4);
                a(q, 2) = xdot[rows[q]];
            }
            const Vec d = a.fullPivLu().solve(-f);
            u.x1 += d[0];
            u.p2 += d[1];
            u.t_half += d[2];
        } else {
            Vec f(2);
            f << z[1], z[3];
            if (f.cwiseAbs().maxCoeff() < cfg.tol) return u;
            Mat a(2, 2);
            const int rows[2] = {1, 3};
            for (int q = 0; q < 2; ++q) {
                a(q, 0) = dphi(rows[q], 4);
                a(q, 1) = xdot[rows[q]];
            }
            const Vec d = a.fullPivLu().solve(-f);
            u.p2 += d[0];
            u.t_half += d[1];
        }
        if (!std::isfinite(u.t_half) || u.t_half <= 0)
            throw NoConvergenceError("periodic orbit correction left the admissible region");
    }
    throw NoConvergenceError("periodic orbit correction did not converge at amplitude " + std::to_string(amplitude));
}

PeriodicOrbit finish(const RtbpModel& model, Generator family, double amplitude, const Unknowns& u, double x_l1,
                     const PoConfig& cfg) {
    PeriodicOrbit po;
    po.family = family;
    po.amplitude = amplitude;
    po.x0 = start_state(family, amplitude, u, x_l1);
    po.period = 2 * u.t_half;
    const FlowResult r = flow_with_jacobian(model, po.x0, po.period, cfg.integrator);
    po.monodromy = *r.jacobian;
    po.closure_error = (r.endpoint - po.x0).cwiseAbs().maxCoeff();
    po.h = model.hamiltonian(po.x0);
    floquet_data(po);
    return po;
}

struct Sample {
    double amplitude;
    Unknowns u;
    double f;
};

}  // namespace

void floquet_data(PeriodicOrbit& po) {
    const Mat& mono = po.monodromy;
    const int d = static_cast<int>(mono.rows());
    Eigen::EigenSolver<Mat> es(mono);
    if (es.info() != Eigen::Success) throw NumericalError("monodromy eigen decomposition failed");
    const Eigen::VectorXcd vals = es.eigenvalues();
    const Eigen::MatrixXcd vecs = es.eigenvectors();

    std::vector<int> idx(d);
    for (int k = 0; k < d; ++k) idx[k] = k;
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return std::abs(vals[a]) > std::abs(vals[b]); });
    const int unstable = idx.front();
    const int stable = idx.back();
    if (std::abs(vals[unstable].imag()) > 1e-8 * std::abs(vals[unstable]) || std::abs(vals[unstable]) < 1 + 1e-6)
        throw DegenerateError("monodromy has no real hyperbolic pair");

    // Of the four remaining multipliers, the two closest to 1 are the trivial pair.
    std::vector<int> rest{idx[1], idx[2], idx[3], idx[4]};
    std::sort(rest.begin(), rest.end(),
              [&](int a, int b) { return std::abs(vals[a] - 1.0) < std::abs(vals[b] - 1.0); });
    const int elliptic = vals[rest[2]].imag() > 0 ? rest[2] : vals[rest[3]].imag() > 0 ? rest[3] : -1;
    if (elliptic < 0 || std::abs(std::abs(vals[elliptic]) - 1) > 1e-6)
        throw DegenerateError("monodromy has no unit-modulus pair besides the trivial one");

    po.hyperbolic_multiplier = vals[unstable].real();
    po.nu = std::arg(vals[elliptic]) / kTwoPi;

    Eigen::VectorXcd v = vecs.col(elliptic);
    Eigen::Index kmax = 0;
    v.cwiseAbs().maxCoeff(&kmax);
    v *= std::conj(v[kmax]) / std::abs(v[kmax]);
    po.elliptic_vector = v / v.norm();

    auto real_unit = [](const Eigen::VectorXcd& c) {
        Vec r = c.real();
        Eigen::Index k = 0;
        r.cwiseAbs().maxCoeff(&k);
        if (r[k] < 0) r = -r;
        return Vec(r / r.norm());
    };
    po.unstable_vector = real_unit(vecs.col(unstable));
    po.stable_vector = real_unit(vecs.col(stable));
}

PeriodicOrbit lyapunov_po(const RtbpModel& model, Generator family, PoTarget target, const PeriodicOrbit* guess,
                          const PoConfig& cfg) {
    const double x_l1 = find_L1(model.params()).x;
    auto unknowns_of = [&](const PeriodicOrbit& po) {
        return Unknowns{po.x0[0], po.x0[4], po.period / 2};
    };
    auto solve_at = [&](double a, const Unknowns* from) {
        Unknowns start = from ? *from : linear_guess(model, family, a);
        return correct(model, family, a, start, x_l1, cfg);
    };

    if (target.kind == PoTarget::Kind::amplitude) {
        if (!(target.value > 0)) throw ConfigError("periodic orbit amplitude must be positive");
        // The linear guess is only good near the equilibrium; march out from there or from the guess.
        const bool seeded = guess && guess->family == family;
        double a = seeded ? guess->amplitude : std::min(target.value, cfg.amplitude_step);
        Unknowns g = seeded ? unknowns_of(*guess) : Unknowns{};
        g = solve_at(a, seeded ? &g : nullptr);
        while (a != target.value) {
            a = a < target.value ? std::min(target.value, a + cfg.amplitude_step)
                                 : std::max(target.value, a - cfg.amplitude_step);
            g = solve_at(a, &g);
        }
        return finish(model, family, target.value, g, x_l1, cfg);
    }

    auto value_of = [&](double a, const Unknowns& u) {
        if (target.kind == PoTarget::Kind::energy)
            return model.hamiltonian(start_state(family, a, u, x_l1)) - target.value;
        return finish(model, family, a, u, x_l1, cfg).nu - target.value;
    };

    // March in amplitude until the target is bracketed.
    double a = guess && guess->family == family ? guess->amplitude : cfg.amplitude_step;
    Unknowns u = guess && guess->family == family ? unknowns_of(*guess) : Unknowns{};
    u = solve_at(a, guess && guess->family == family ? &u : nullptr);
    Sample lo{a, u, value_of(a, u)};
    Sample hi = lo;
    double dir = 1.0;
    bool flipped = false;
    bool bracketed = false;
    for (int k = 0; k < 400; ++k) {
        double a_next = hi.amplitude + dir * cfg.amplitude_step;
        if (a_next <= 0) a_next = hi.amplitude / 2;
        if (a_next > cfg.max_amplitude) break;
        Unknowns un = solve_at(a_next, &hi.u);
        Sample s{a_next, un, value_of(a_next, un)};
        if ((s.f < 0) != (hi.f < 0)) {
            lo = hi;
            hi = s;
            bracketed = true;
            break;
        }
        if (!flipped && std::abs(s.f) > std::abs(hi.f)) {
            dir = -dir;
            flipped = true;
            continue;
        }
        hi = s;
    }
    if (!bracketed) throw NoConvergenceError("periodic orbit target is not reached within the amplitude range");

    // Illinois regula falsi on the bracket.
    double side = 0;
    for (int it = 0; it < cfg.max_secant; ++it) {
        const double a_new = hi.amplitude - hi.f * (hi.amplitude - lo.amplitude) / (hi.f - lo.f);
        const Sample& near = std::abs(a_new - lo.amplitude) < std::abs(a_new - hi.amplitude) ? lo : hi;
        Unknowns un = solve_at(a_new, &near.u);
        Sample s{a_new, un, value_of(a_new, un)};
        if (std::abs(s.f) < cfg.target_tol || std::abs(hi.amplitude - lo.amplitude) < 1e-15)
            return finish(model, family, s.amplitude, s.u, x_l1, cfg);
        if ((s.f < 0) == (hi.f < 0)) {
            hi = s;
            if (side == 1) lo.f /= 2;
            side = 1;
        } else {
            lo = hi;
            hi = s;
            side = -1;
        }
    }
    throw NoConvergenceError("periodic orbit target search did not converge");
}

TorusState seed_from_po(const HamiltonianModel& model, const PeriodicOrbit& po, const SeedConfig& cfg) {
    const int m = cfg.m, N = cfg.N, d = model.dim();
    if (m < 1 || N < 4 || N % 2) throw ConfigError("seed needs m >= 1 and an even N >= 4");
    if (po.elliptic_vector.size() != d) throw DegenerateError("periodic orbit lacks Floquet data");

    double mult = 0;
    Vec w;
    if (cfg.bundle == BundleKind::stable) {
        mult = 1.0 / po.hyperbolic_multiplier;
        w = po.stable_vector;
    } else {
        mult = po.hyperbolic_multiplier;
        w = po.unstable_vector;
    }
    if (mult < 0 && m % 2 == 0) throw DegenerateError("negative multiplier has no real even root");
    const double lam = std::copysign(std::pow(std::abs(mult), 1.0 / m), mult);

    TorusState s;
    s.n = d / 2;
    s.m = m;
    s.omega = po.nu;
    s.T = po.period;
    s.lambda = lam;
    s.generator = po.family;
    s.bundle = cfg.bundle;

    Mat cols(d, 3);
    cols.col(0) = po.elliptic_vector.real();
    cols.col(1) = po.elliptic_vector.imag();
    cols.col(2) = w;
    Vec x = po.x0;
    for (int i = 0; i < m; ++i) {
        if (i > 0) {
            const FlowResult r = flow_applied(model, x, po.period / m, cols, cfg.integrator);
            x = r.endpoint;
            cols = *r.applied;
        }
        Mat k(N, d), wi(N, d);
        const double wscale = std::pow(lam, -i);
        for (int j = 0; j < N; ++j) {
            const double phase = kTwoPi * (static_cast<double>(j) / N - i * po.nu / m);
            k.row(j) = (x + cfg.amplitude * (cols.col(0) * std::cos(phase) - cols.col(1) * std::sin(phase)))
                           .transpose();
            wi.row(j) = (wscale * cols.col(2)).transpose();
        }
        s.K.push_back(CurveMap::from_samples(k));
        s.W.push_back(CurveMap::from_samples(wi));
    }
    s.h = mean_energy(model, s.K[0]);
    return s;
}

TorusState refine_seed(const HamiltonianModel& model, const TorusState& seed, const RefineConfig& cfg,
                       RefineReport* report) {
    RefineConfig c = cfg;
    c.mode = NewtonMode::isoenergetic;
    TorusState s = seed;
    s.h = mean_energy(model, seed.K[0]);
    return refine(model, s, c, report);
}

CurveMap flow_by(const HamiltonianModel& model, const CurveMap& k, const PeriodicFunction& times,
                 const IntegratorConfig& cfg) {
    const int N = k.size();
    if (times.size() != N) throw std::invalid_argument("one flying time per grid point");
    const Mat pts = k.samples();
    Mat out(N, k.dim());
    parallel_for(N, cfg.workers, [&](int j) {
        out.row(j) = flow_point(model, pts.row(j).transpose(), times[j], cfg).endpoint.transpose();
    });
    return CurveMap::from_samples(out);
}

double poincare_residual(const HamiltonianModel& model, const CurveMap& k_p, const PeriodicFunction& t_p,
                         double omega, const IntegratorConfig& cfg) {
    const CurveMap img = flow_by(model, k_p, t_p, cfg);
    return (img.samples() - rotate(k_p, omega).samples()).cwiseAbs().maxCoeff();
}

FlowMapTorus poincare_to_flowmap(const HamiltonianModel& model, const CurveMap& k_p, const PeriodicFunction& t_p,
                                 double omega, const IntegratorConfig& cfg, const CohomologyOptions& opt) {
    if (k_p.size() != t_p.size()) throw std::invalid_argument("K_P and T_P must share the grid");
    FlowMapTorus out;
    out.T = average(t_p);
    const auto& ts = t_p.samples();
    const bool constant = std::all_of(ts.begin(), ts.end(), [&](double v) { return v == ts.front(); });
    if (constant) {
        out.T = ts.front();
        out.tau = PeriodicFunction(t_p.size());
        out.K = k_p;
        return out;
    }
    out.tau = solve_small_divisor(t_p, omega, opt).xi;
    out.K = flow_by(model, k_p, out.tau, cfg);
    return out;
}

}  // namespace phtori

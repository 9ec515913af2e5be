#include "phtori/model.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "phtori/errors.hpp"

namespace phtori {

Mat SymplecticStructure::omega(std::span<const double>) const {
    Mat w = Mat::Zero(dim(), dim());
    w.topRightCorner(n_, n_) = -Mat::Identity(n_, n_);
    w.bottomLeftCorner(n_, n_) = Mat::Identity(n_, n_);
    return w;
}

Mat SymplecticStructure::omega_inverse(std::span<const double> z) const { return -omega(z); }

Vec SymplecticStructure::action_form(std::span<const double> z) const {
    Vec a(dim());
    for (int k = 0; k < n_; ++k) {
        a[k] = 0.5 * z[n_ + k];
        a[n_ + k] = -0.5 * z[k];
    }
    return a;
}

Mat SymplecticStructure::action_jacobian(std::span<const double>) const {
    Mat d = Mat::Zero(dim(), dim());
    d.topRightCorner(n_, n_) = 0.5 * Mat::Identity(n_, n_);
    d.bottomLeftCorner(n_, n_) = -0.5 * Mat::Identity(n_, n_);
    return d;
}

Mat SymplecticStructure::almost_complex(std::span<const double> z) const { return omega(z); }

Mat SymplecticStructure::metric(std::span<const double>) const { return Mat::Identity(dim(), dim()); }

double SymplecticStructure::action_apply(std::span<const double> z, std::span<const double> v) const {
    double s = 0;
    for (int k = 0; k < n_; ++k) s += z[n_ + k] * v[k] - z[k] * v[n_ + k];
    return 0.5 * s;
}

Vec HamiltonianModel::vector_field(const Vec& z) const {
    Vec out(dim());
    vector_field(std::span<const double>(z.data(), z.size()), std::span<double>(out.data(), out.size()));
    return out;
}

Vec HamiltonianModel::gradient(const Vec& z) const {
    Vec out(dim());
    gradient(std::span<const double>(z.data(), z.size()), std::span<double>(out.data(), out.size()));
    return out;
}

Mat HamiltonianModel::jacobian(const Vec& z) const {
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> out(dim(), dim());
    jacobian(std::span<const double>(z.data(), z.size()), std::span<double>(out.data(), out.size()));
    return out;
}

Vec HamiltonianModel::hessian_action(const Vec& z, const Vec& u, const Vec& v) const {
    Vec out(dim());
    hessian_action(std::span<const double>(z.data(), z.size()), std::span<const double>(u.data(), u.size()),
                   std::span<const double>(v.data(), v.size()), std::span<double>(out.data(), out.size()));
    return out;
}

// ---------------------------------------------------------------------------

RtbpModel::RtbpModel(RtbpParams params) : HamiltonianModel(3), params_(params) {
    if (!(params_.mu > 0 && params_.mu < 0.5))
        throw ConfigError("mass ratio must lie in (0, 1/2)");
}

void RtbpModel::distances(std::span<const double> z, double d1[3], double d2[3], double& r1,
                          double& r2) const {
    const double mu = params_.mu;
    d1[0] = z[0] - mu;
    d2[0] = z[0] - mu + 1.0;
    d1[1] = d2[1] = z[1];
    d1[2] = d2[2] = z[2];
    r1 = std::sqrt(d1[0] * d1[0] + d1[1] * d1[1] + d1[2] * d1[2]);
    r2 = std::sqrt(d2[0] * d2[0] + d2[1] * d2[1] + d2[2] * d2[2]);
    if (!(r1 > params_.singularity_guard) || !(r2 > params_.singularity_guard))
        throw SingularityError("state too close to a primary");
}

double RtbpModel::hamiltonian(std::span<const double> z) const {
    double d1[3], d2[3], r1, r2;
    distances(z, d1, d2, r1, r2);
    const double mu = params_.mu;
    const double kin = 0.5 * (z[3] * z[3] + z[4] * z[4] + z[5] * z[5]);
    return kin - z[0] * z[4] + z[1] * z[3] - (1 - mu) / r1 - mu / r2;
}

namespace {

// Gradient of U = (1-mu)/r1 + mu/r2 with respect to x.
void potential_gradient(double mu, const double d1[3], const double d2[3], double r1, double r2,
                        double g[3]) {
    const double c1 = (1 - mu) / (r1 * r1 * r1);
    const double c2 = mu / (r2 * r2 * r2);
    for (int k = 0; k < 3; ++k) g[k] = -c1 * d1[k] - c2 * d2[k];
}

}  // namespace

void RtbpModel::gradient(std::span<const double> z, std::span<double> out) const {
    double d1[3], d2[3], r1, r2, g[3];
    distances(z, d1, d2, r1, r2);
    potential_gradient(params_.mu, d1, d2, r1, r2, g);
    out[0] = -z[4] - g[0];
    out[1] = z[3] - g[1];
    out[2] = -g[2];
    out[3] = z[3] + z[1];
    out[4] = z[4] - z[0];
    out[5] = z[5];
}

void RtbpModel::vector_field(std::span<const double> z, std::span<double> out) const {
    double d1[3], d2[3], r1, r2, g[3];
    distances(z, d1, d2, r1, r2);
    potential_gradient(params_.mu, d1, d2, r1, r2, g);
    out[0] = z[3] + z[1];
    out[1] = z[4] - z[0];
    out[2] = z[5];
    out[3] = z[4] + g[0];
    out[4] = -z[3] + g[1];
    out[5] = g[2];
}

void RtbpModel::jacobian(std::span<const double> z, std::span<double> out) const {
    double d1[3], d2[3], r1, r2;
    distances(z, d1, d2, r1, r2);
    const double mu = params_.mu;
    const double a1 = (1 - mu) / (r1 * r1 * r1), b1 = 3 * (1 - mu) / std::pow(r1, 5);
    const double a2 = mu / (r2 * r2 * r2), b2 = 3 * mu / std::pow(r2, 5);
    std::fill(out.begin(), out.end(), 0.0);
    auto at = [&](int r, int c) -> double& { return out[r * 6 + c]; };
    at(0, 1) = 1;
    at(0, 3) = 1;
    at(1, 0) = -1;
    at(1, 4) = 1;
    at(2, 5) = 1;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            at(3 + i, j) = b1 * d1[i] * d1[j] + b2 * d2[i] * d2[j] - (i == j ? a1 + a2 : 0.0);
    at(3, 4) = 1;
    at(4, 3) = -1;
}

void RtbpModel::hessian_action(std::span<const double> z, std::span<const double> u,
                               std::span<const double> v, std::span<double> out) const {
    double d1[3], d2[3], r1, r2;
    distances(z, d1, d2, r1, r2);
    const double mu = params_.mu;
    out[0] = out[1] = out[2] = 0;
    for (int k = 3; k < 6; ++k) out[k] = 0;
    auto add = [&](double mass, const double d[3], double r) {
        const double du = d[0] * u[0] + d[1] * u[1] + d[2] * u[2];
        const double dv = d[0] * v[0] + d[1] * v[1] + d[2] * v[2];
        const double uv = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
        const double r2i = 1.0 / (r * r);
        const double r5i = r2i * r2i / r;
        const double r7i = r5i * r2i;
        for (int i = 0; i < 3; ++i)
            out[3 + i] += mass * (-15.0 * d[i] * (du * dv) * r7i +
                                  3.0 * (u[i] * dv + v[i] * du + d[i] * uv) * r5i);
    };
    add(1 - mu, d1, r1);
    add(mu, d2, r2);
}

// ---------------------------------------------------------------------------

Vec L1Point::state() const {
    Vec z = Vec::Zero(6);
    z[0] = x;
    z[4] = x;
    return z;
}

L1Point find_L1(const RtbpParams& params, int max_iter) {
    const double mu = params.mu;
    if (!(mu > 0 && mu < 0.5)) throw ConfigError("mass ratio must lie in (0, 1/2)");
    auto f = [mu](double g) {
        return ((((g - (3 - mu)) * g + (3 - 2 * mu)) * g - mu) * g + 2 * mu) * g - mu;
    };
    auto df = [mu](double g) {
        return (((5 * g - 4 * (3 - mu)) * g + 3 * (3 - 2 * mu)) * g - 2 * mu) * g + 2 * mu;
    };
    double lo = 0, hi = 1;
    double g = std::cbrt(mu / 3);
    if (!(g > lo && g < hi)) g = 0.5;
    for (int it = 0; it < max_iter; ++it) {
        const double fg = f(g);
        if (fg == 0) break;
        if (fg < 0)
            lo = g;
        else
            hi = g;
        double next = g - fg / df(g);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - g) <= 4e-16 * std::max(1.0, std::abs(g))) {
            g = next;
            break;
        }
        g = next;
        if (it == max_iter - 1) throw NoConvergenceError("L1 quintic did not converge");
    }
    return {mu - 1 + g, g};
}

LinearSpectrum linear_spectrum_at(const HamiltonianModel& model, const Vec& z_eq) {
    const int dim = model.dim();
    if (dim != 6) throw DegenerateError("linear spectrum classification expects three degrees of freedom");
    const Mat a = model.jacobian(z_eq);
    Eigen::EigenSolver<Mat> es(a);
    if (es.info() != Eigen::Success) throw NumericalError("eigen decomposition failed");
    const auto vals = es.eigenvalues();
    const auto vecs = es.eigenvectors();

    LinearSpectrum out;
    std::vector<int> centers;
    int unstable = -1, stable = -1;
    const double scale = std::max(1.0, vals.cwiseAbs().maxCoeff());
    for (int k = 0; k < dim; ++k) {
        const double re = vals[k].real(), im = vals[k].imag();
        if (std::abs(im) < 1e-9 * scale) {
            if (re > 1e-9 * scale) unstable = k;
            if (re < -1e-9 * scale) stable = k;
        } else if (std::abs(re) < 1e-9 * scale && im > 0) {
            centers.push_back(k);
        }
    }
    if (unstable < 0 || stable < 0 || centers.size() != 2)
        throw DegenerateError("spectrum is not of center x center x saddle type");

    for (int k : centers) {
        const Eigen::VectorXcd v = vecs.col(k);
        const double planar_part = std::abs(v[0]) + std::abs(v[1]) + std::abs(v[3]) + std::abs(v[4]);
        const double freq = vals[k].imag() / (2 * std::numbers::pi);
        if (planar_part < 1e-10 * v.norm()) {
            out.omega_v = freq;
            out.vertical_vector = v;
        } else {
            out.omega_p = freq;
            out.planar_vector = v;
        }
    }
    if (out.vertical_vector.size() == 0 || out.planar_vector.size() == 0)
        throw DegenerateError("could not separate planar and vertical centers");
    out.lambda = vals[unstable].real();
    out.unstable_vector = vecs.col(unstable).real().normalized();
    out.stable_vector = vecs.col(stable).real().normalized();
    return out;
}

}  // namespace phtori

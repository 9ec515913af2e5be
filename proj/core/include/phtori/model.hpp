#pragma once

#include <Eigen/Dense>
#include <complex>
#include <span>

namespace phtori {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Standard exact symplectic structure on R^{2n}, z = (x, p).
// omega = [[0,-I],[I,0]], a(z) = (p, -x)/2, J = omega, G = I.
// The z arguments are kept so that position dependent structures fit the same calls.
class SymplecticStructure {
public:
    explicit SymplecticStructure(int n) : n_(n) {}

    int dof() const { return n_; }
    int dim() const { return 2 * n_; }

    Mat omega(std::span<const double> z = {}) const;
    Mat omega_inverse(std::span<const double> z = {}) const;
    Vec action_form(std::span<const double> z) const;
    Mat action_jacobian(std::span<const double> z = {}) const;
    Mat almost_complex(std::span<const double> z = {}) const;
    Mat metric(std::span<const double> z = {}) const;

    // a(z)^T v without building matrices.
    double action_apply(std::span<const double> z, std::span<const double> v) const;

private:
    int n_;
};

// Autonomous Hamiltonian system, X_H = omega^{-1} DH^T.
// All calls are const and reentrant.
class HamiltonianModel {
public:
    explicit HamiltonianModel(int n) : structure_(n) {}
    virtual ~HamiltonianModel() = default;

    int dof() const { return structure_.dof(); }
    int dim() const { return structure_.dim(); }
    const SymplecticStructure& structure() const { return structure_; }

    virtual double hamiltonian(std::span<const double> z) const = 0;
    virtual void gradient(std::span<const double> z, std::span<double> out) const = 0;
    virtual void vector_field(std::span<const double> z, std::span<double> out) const = 0;
    // Row-major dim x dim.
    virtual void jacobian(std::span<const double> z, std::span<double> out) const = 0;
    // D^2 X_H(z)[u, v].
    virtual void hessian_action(std::span<const double> z, std::span<const double> u,
                                std::span<const double> v, std::span<double> out) const = 0;

    Vec vector_field(const Vec& z) const;
    Vec gradient(const Vec& z) const;
    Mat jacobian(const Vec& z) const;
    Vec hessian_action(const Vec& z, const Vec& u, const Vec& v) const;
    double hamiltonian(const Vec& z) const { return hamiltonian(std::span<const double>(z.data(), z.size())); }

private:
    SymplecticStructure structure_;
};

struct RtbpParams {
    double mu = 1.215058560962404e-2;
    double singularity_guard = 1e-12;
};

// Spatial circular restricted three-body problem in the rotating frame.
// The primary of mass 1-mu sits at (mu,0,0), the one of mass mu at (mu-1,0,0).
class RtbpModel final : public HamiltonianModel {
public:
    explicit RtbpModel(RtbpParams params = {});

    const RtbpParams& params() const { return params_; }
    double mu() const { return params_.mu; }

    double hamiltonian(std::span<const double> z) const override;
    void gradient(std::span<const double> z, std::span<double> out) const override;
    void vector_field(std::span<const double> z, std::span<double> out) const override;
    void jacobian(std::span<const double> z, std::span<double> out) const override;
    void hessian_action(std::span<const double> z, std::span<const double> u,
                        std::span<const double> v, std::span<double> out) const override;

    using HamiltonianModel::gradient;
    using HamiltonianModel::hamiltonian;
    using HamiltonianModel::hessian_action;
    using HamiltonianModel::jacobian;
    using HamiltonianModel::vector_field;

private:
    void distances(std::span<const double> z, double d1[3], double d2[3], double& r1,
                   double& r2) const;
    RtbpParams params_;
};

struct L1Point {
    double x = 0;
    double gamma = 0;
    Vec state() const;  // equilibrium in phase space
};

L1Point find_L1(const RtbpParams& params, int max_iter = 200);

struct LinearSpectrum {
    double omega_p = 0;  // planar frequency, eigenvalues +-i 2 pi omega_p
    double omega_v = 0;  // vertical frequency
    double lambda = 0;   // real saddle exponent
    Eigen::VectorXcd planar_vector;
    Eigen::VectorXcd vertical_vector;
    Vec unstable_vector;
    Vec stable_vector;
};

// Center x center x saddle spectrum at an equilibrium.
LinearSpectrum linear_spectrum_at(const HamiltonianModel& model, const Vec& z_eq);

}  // namespace phtori

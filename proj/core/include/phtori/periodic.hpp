#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace phtori {

using cplx = std::complex<double>;

bool is_power_of_two(int n);

// Real 1-periodic function kept both as N samples zeta(j/N) and as the
// coefficients c_k = (1/N) sum_j zeta_j e^{-i 2 pi k j / N}, k = 0..N/2.
// The interpolant is
//   c_0 + sum_{0<k<N/2} 2 Re(c_k e^{i 2 pi k theta}) + c_{N/2} cos(pi N theta).
class PeriodicFunction {
public:
    PeriodicFunction() = default;
    explicit PeriodicFunction(int n);  // zero function

    static PeriodicFunction from_samples(std::vector<double> samples);
    static PeriodicFunction from_samples(const Eigen::Ref<const Eigen::VectorXd>& samples);
    static PeriodicFunction from_coeffs(std::vector<cplx> coeffs, int n);
    static PeriodicFunction constant(int n, double c);

    int size() const { return static_cast<int>(samples_.size()); }
    const std::vector<double>& samples() const { return samples_; }
    const std::vector<cplx>& coeffs() const { return coeffs_; }
    double operator[](int j) const { return samples_[j]; }

    // Value of the trigonometric interpolant at an arbitrary angle.
    double operator()(double theta) const;

    PeriodicFunction& operator+=(const PeriodicFunction& o);
    PeriodicFunction& operator-=(const PeriodicFunction& o);
    PeriodicFunction& operator*=(double s);

private:
    std::vector<double> samples_;
    std::vector<cplx> coeffs_;
};

PeriodicFunction operator+(PeriodicFunction a, const PeriodicFunction& b);
PeriodicFunction operator-(PeriodicFunction a, const PeriodicFunction& b);
PeriodicFunction operator*(double s, PeriodicFunction a);

// FFT helpers (coefficients normalized as above).
std::vector<cplx> to_coeffs(const std::vector<double>& samples);
std::vector<double> to_samples(const std::vector<cplx>& coeffs, int n);

PeriodicFunction derivative(const PeriodicFunction& f);
PeriodicFunction rotate(const PeriodicFunction& f, double delta);
double average(const PeriodicFunction& f);
// Zeroes coefficients with k > cutoff; cutoff < 0 means N/4.
PeriodicFunction clean_tail(const PeriodicFunction& f, int cutoff = -1);
PeriodicFunction resample(const PeriodicFunction& f, int n_new);
// Pointwise product on the grid.
PeriodicFunction product(const PeriodicFunction& a, const PeriodicFunction& b);

// Map T^1 -> R^d, one PeriodicFunction per component, all sharing N.
class CurveMap {
public:
    CurveMap() = default;
    CurveMap(int dim, int n);  // zero curve
    explicit CurveMap(std::vector<PeriodicFunction> components);

    // Rows are grid points, columns are components.
    static CurveMap from_samples(const Eigen::MatrixXd& samples);

    int dim() const { return static_cast<int>(comps_.size()); }
    int size() const { return comps_.empty() ? 0 : comps_.front().size(); }
    const PeriodicFunction& operator[](int c) const { return comps_[c]; }
    PeriodicFunction& operator[](int c) { return comps_[c]; }
    const std::vector<PeriodicFunction>& components() const { return comps_; }

    Eigen::MatrixXd samples() const;
    Eigen::VectorXd point(int j) const;
    Eigen::VectorXd operator()(double theta) const;

    CurveMap& operator+=(const CurveMap& o);
    CurveMap& operator-=(const CurveMap& o);
    CurveMap& operator*=(double s);

private:
    std::vector<PeriodicFunction> comps_;
};

CurveMap operator+(CurveMap a, const CurveMap& b);
CurveMap operator-(CurveMap a, const CurveMap& b);
CurveMap operator*(double s, CurveMap a);

CurveMap derivative(const CurveMap& k);
CurveMap rotate(const CurveMap& k, double delta);
Eigen::VectorXd average(const CurveMap& k);
CurveMap clean_tail(const CurveMap& k, int cutoff = -1);
CurveMap resample(const CurveMap& k, int n_new);

// Rotation of a sample matrix (rows = grid points) column by column.
Eigen::MatrixXd rotate_samples(const Eigen::MatrixXd& samples, double delta);

}  // namespace phtori

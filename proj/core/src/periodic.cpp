#include "phtori/periodic.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "phtori/errors.hpp"

namespace phtori {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

struct Plans {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
};

// Planning is not thread safe in FFTW; execution with new arrays is.
std::mutex g_plan_mutex;
std::map<int, Plans> g_plans;

const Plans& plans_for(int n) {
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    auto it = g_plans.find(n);
    if (it != g_plans.end()) return it->second;
    std::vector<double> in(n);
    std::vector<cplx> out(n / 2 + 1);
    Plans p;
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    p.forward = fftw_plan_dft_r2c_1d(n, in.data(), reinterpret_cast<fftw_complex*>(out.data()), flags);
    p.backward = fftw_plan_dft_c2r_1d(n, reinterpret_cast<fftw_complex*>(out.data()), in.data(),
                                      flags | FFTW_DESTROY_INPUT);
    if (!p.forward || !p.backward) throw std::runtime_error("FFTW planning failed");
    return g_plans.emplace(n, p).first->second;
}

void check_size(int n) {
    if (!is_power_of_two(n) || n < 2) throw ConfigError("grid size must be a power of two >= 2");
}

}  // namespace

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

std::vector<cplx> to_coeffs(const std::vector<double>& samples) {
    const int n = static_cast<int>(samples.size());
    check_size(n);
    const Plans& p = plans_for(n);
    std::vector<double> in(samples);
    std::vector<cplx> out(n / 2 + 1);
    fftw_execute_dft_r2c(p.forward, in.data(), reinterpret_cast<fftw_complex*>(out.data()));
    const double inv = 1.0 / n;
    for (auto& c : out) c *= inv;
    out[0] = out[0].real();
    out[n / 2] = out[n / 2].real();
    return out;
}

std::vector<double> to_samples(const std::vector<cplx>& coeffs, int n) {
    check_size(n);
    if (static_cast<int>(coeffs.size()) != n / 2 + 1) throw std::invalid_argument("coefficient count mismatch");
    const Plans& p = plans_for(n);
    std::vector<cplx> in(coeffs);
    in[0] = in[0].real();
    in[n / 2] = in[n / 2].real();
    std::vector<double> out(n);
    fftw_execute_dft_c2r(p.backward, reinterpret_cast<fftw_complex*>(in.data()), out.data());
    return out;
}

PeriodicFunction::PeriodicFunction(int n) {
    check_size(n);
    samples_.assign(n, 0.0);
    coeffs_.assign(n / 2 + 1, cplx(0.0));
}

PeriodicFunction PeriodicFunction::from_samples(std::vector<double> samples) {
    PeriodicFunction f;
    f.coeffs_ = to_coeffs(samples);
    f.samples_ = std::move(samples);
    return f;
}

PeriodicFunction PeriodicFunction::from_samples(const Eigen::Ref<const Eigen::VectorXd>& samples) {
    return from_samples(std::vector<double>(samples.data(), samples.data() + samples.size()));
}

PeriodicFunction PeriodicFunction::from_coeffs(std::vector<cplx> coeffs, int n) {
    PeriodicFunction f;
    check_size(n);
    if (static_cast<int>(coeffs.size()) != n / 2 + 1) throw std::invalid_argument("coefficient count mismatch");
    coeffs[0] = coeffs[0].real();
    coeffs[n / 2] = coeffs[n / 2].real();
    f.samples_ = to_samples(coeffs, n);
    f.coeffs_ = std::move(coeffs);
    return f;
}

PeriodicFunction PeriodicFunction::constant(int n, double c) {
    PeriodicFunction f(n);
    std::fill(f.samples_.begin(), f.samples_.end(), c);
    f.coeffs_[0] = c;
    return f;
}

double PeriodicFunction::operator()(double theta) const {
    const int n = size();
    double v = coeffs_[0].real();
    for (int k = 1; k < n / 2; ++k) {
        const cplx e = std::polar(1.0, kTwoPi * k * theta);
        v += 2.0 * (coeffs_[k] * e).real();
    }
    v += coeffs_[n / 2].real() * std::cos(std::numbers::pi * n * theta);
    return v;
}

PeriodicFunction& PeriodicFunction::operator+=(const PeriodicFunction& o) {
    if (o.size() != size()) throw std::invalid_argument("grid size mismatch");
    for (int j = 0; j < size(); ++j) samples_[j] += o.samples_[j];
    for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] += o.coeffs_[k];
    return *this;
}

PeriodicFunction& PeriodicFunction::operator-=(const PeriodicFunction& o) {
    if (o.size() != size()) throw std::invalid_argument("grid size mismatch");
    for (int j = 0; j < size(); ++j) samples_[j] -= o.samples_[j];
    for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] -= o.coeffs_[k];
    return *this;
}

PeriodicFunction& PeriodicFunction::operator*=(double s) {
    for (auto& v : samples_) v *= s;
    for (auto& c : coeffs_) c *= s;
    return *this;
}

PeriodicFunction operator+(PeriodicFunction a, const PeriodicFunction& b) { return a += b; }
PeriodicFunction operator-(PeriodicFunction a, const PeriodicFunction& b) { return a -= b; }
PeriodicFunction operator*(double s, PeriodicFunction a) { return a *= s; }

PeriodicFunction derivative(const PeriodicFunction& f) {
    const int n = f.size();
    std::vector<cplx> c(f.coeffs());
    for (int k = 0; k < n / 2; ++k) c[k] *= cplx(0.0, kTwoPi * k);
    c[n / 2] = 0.0;
    return PeriodicFunction::from_coeffs(std::move(c), n);
}

PeriodicFunction rotate(const PeriodicFunction& f, double delta) {
    if (delta == 0.0) return f;
    const int n = f.size();
    std::vector<cplx> c(f.coeffs());
    for (int k = 1; k < n / 2; ++k) c[k] *= std::polar(1.0, kTwoPi * k * delta);
    c[n / 2] *= std::cos(std::numbers::pi * n * delta);
    return PeriodicFunction::from_coeffs(std::move(c), n);
}

double average(const PeriodicFunction& f) { return f.coeffs()[0].real(); }

PeriodicFunction clean_tail(const PeriodicFunction& f, int cutoff) {
    const int n = f.size();
    if (cutoff < 0) cutoff = n / 4;
    bool any = false;
    for (int k = cutoff + 1; k <= n / 2; ++k) any = any || f.coeffs()[k] != cplx(0.0);
    if (!any) return f;
    std::vector<cplx> c(f.coeffs());
    for (int k = cutoff + 1; k <= n / 2; ++k) c[k] = 0.0;
    return PeriodicFunction::from_coeffs(std::move(c), n);
}

PeriodicFunction resample(const PeriodicFunction& f, int n_new) {
    check_size(n_new);
    const int n = f.size();
    if (n_new == n) return f;
    const auto& c = f.coeffs();
    std::vector<cplx> d(n_new / 2 + 1, cplx(0.0));
    if (n_new > n) {
        for (int k = 0; k < n / 2; ++k) d[k] = c[k];
        d[n / 2] = 0.5 * c[n / 2];
    } else {
        for (int k = 0; k < n_new / 2; ++k) d[k] = c[k];
        d[n_new / 2] = 2.0 * c[n_new / 2].real();
    }
    return PeriodicFunction::from_coeffs(std::move(d), n_new);
}

PeriodicFunction product(const PeriodicFunction& a, const PeriodicFunction& b) {
    if (a.size() != b.size()) throw std::invalid_argument("grid size mismatch");
    std::vector<double> s(a.size());
    for (int j = 0; j < a.size(); ++j) s[j] = a[j] * b[j];
    return PeriodicFunction::from_samples(std::move(s));
}

// ---------------------------------------------------------------------------

CurveMap::CurveMap(int dim, int n) : comps_(dim, PeriodicFunction(n)) {}

CurveMap::CurveMap(std::vector<PeriodicFunction> components) : comps_(std::move(components)) {
    for (const auto& c : comps_)
        if (c.size() != comps_.front().size()) throw std::invalid_argument("components must share N");
}

CurveMap CurveMap::from_samples(const Eigen::MatrixXd& samples) {
    std::vector<PeriodicFunction> c;
    c.reserve(samples.cols());
    for (int k = 0; k < samples.cols(); ++k) c.push_back(PeriodicFunction::from_samples(samples.col(k)));
    return CurveMap(std::move(c));
}

Eigen::MatrixXd CurveMap::samples() const {
    Eigen::MatrixXd s(size(), dim());
    for (int c = 0; c < dim(); ++c)
        for (int j = 0; j < size(); ++j) s(j, c) = comps_[c][j];
    return s;
}

Eigen::VectorXd CurveMap::point(int j) const {
    Eigen::VectorXd v(dim());
    for (int c = 0; c < dim(); ++c) v[c] = comps_[c][j];
    return v;
}

Eigen::VectorXd CurveMap::operator()(double theta) const {
    Eigen::VectorXd v(dim());
    for (int c = 0; c < dim(); ++c) v[c] = comps_[c](theta);
    return v;
}

CurveMap& CurveMap::operator+=(const CurveMap& o) {
    if (o.dim() != dim()) throw std::invalid_argument("dimension mismatch");
    for (int c = 0; c < dim(); ++c) comps_[c] += o.comps_[c];
    return *this;
}

CurveMap& CurveMap::operator-=(const CurveMap& o) {
    if (o.dim() != dim()) throw std::invalid_argument("dimension mismatch");
    for (int c = 0; c < dim(); ++c) comps_[c] -= o.comps_[c];
    return *this;
}

CurveMap& CurveMap::operator*=(double s) {
    for (auto& c : comps_) c *= s;
    return *this;
}

CurveMap operator+(CurveMap a, const CurveMap& b) { return a += b; }
CurveMap operator-(CurveMap a, const CurveMap& b) { return a -= b; }
CurveMap operator*(double s, CurveMap a) { return a *= s; }

namespace {
template <class F>
CurveMap map_components(const CurveMap& k, F f) {
    std::vector<PeriodicFunction> c;
    c.reserve(k.dim());
    for (int i = 0; i < k.dim(); ++i) c.push_back(f(k[i]));
    return CurveMap(std::move(c));
}
}  // namespace

CurveMap derivative(const CurveMap& k) {
    return map_components(k, [](const PeriodicFunction& f) { return derivative(f); });
}

CurveMap rotate(const CurveMap& k, double delta) {
    return map_components(k, [delta](const PeriodicFunction& f) { return rotate(f, delta); });
}

Eigen::VectorXd average(const CurveMap& k) {
    Eigen::VectorXd v(k.dim());
    for (int c = 0; c < k.dim(); ++c) v[c] = average(k[c]);
    return v;
}

CurveMap clean_tail(const CurveMap& k, int cutoff) {
    return map_components(k, [cutoff](const PeriodicFunction& f) { return clean_tail(f, cutoff); });
}

CurveMap resample(const CurveMap& k, int n_new) {
    return map_components(k, [n_new](const PeriodicFunction& f) { return resample(f, n_new); });
}

Eigen::MatrixXd rotate_samples(const Eigen::MatrixXd& samples, double delta) {
    Eigen::MatrixXd out(samples.rows(), samples.cols());
    for (int c = 0; c < samples.cols(); ++c) {
        const auto f = rotate(PeriodicFunction::from_samples(samples.col(c)), delta);
        for (int j = 0; j < samples.rows(); ++j) out(j, c) = f[j];
    }
    return out;
}

}  // namespace phtori

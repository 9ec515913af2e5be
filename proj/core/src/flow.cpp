#include "phtori/flow.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>
#include <thread>

#include "phtori/errors.hpp"

namespace phtori {

namespace {

std::atomic<int> g_workers{0};

// Fehlberg 7(8) tableau.
constexpr int kStages = 13;
constexpr double C[kStages] = {0,       2.0 / 27, 1.0 / 9, 1.0 / 6, 5.0 / 12, 1.0 / 2, 5.0 / 6,
                               1.0 / 6, 2.0 / 3,  1.0 / 3, 1.0,     0.0,      1.0};
constexpr double A[kStages][kStages - 1] = {
    {},
    {2.0 / 27},
    {1.0 / 36, 1.0 / 12},
    {1.0 / 24, 0, 1.0 / 8},
    {5.0 / 12, 0, -25.0 / 16, 25.0 / 16},
    {1.0 / 20, 0, 0, 1.0 / 4, 1.0 / 5},
    {-25.0 / 108, 0, 0, 125.0 / 108, -65.0 / 27, 125.0 / 54},
    {31.0 / 300, 0, 0, 0, 61.0 / 225, -2.0 / 9, 13.0 / 900},
    {2.0, 0, 0, -53.0 / 6, 704.0 / 45, -107.0 / 9, 67.0 / 90, 3.0},
    {-91.0 / 108, 0, 0, 23.0 / 108, -976.0 / 135, 311.0 / 54, -19.0 / 60, 17.0 / 6, -1.0 / 12},
    {2383.0 / 4100, 0, 0, -341.0 / 164, 4496.0 / 1025, -301.0 / 82, 2133.0 / 4100, 45.0 / 82, 45.0 / 164,
     18.0 / 41},
    {3.0 / 205, 0, 0, 0, 0, -6.0 / 41, -3.0 / 205, -3.0 / 41, 3.0 / 41, 6.0 / 41, 0},
    {-1777.0 / 4100, 0, 0, -341.0 / 164, 4496.0 / 1025, -289.0 / 82, 2193.0 / 4100, 51.0 / 82, 33.0 / 164,
     12.0 / 41, 0, 1.0}};
constexpr double B8[kStages] = {0, 0, 0, 0, 0, 34.0 / 105, 9.0 / 35, 9.0 / 35, 9.0 / 280, 9.0 / 280, 0,
                                41.0 / 840, 41.0 / 840};
constexpr double kErr = 41.0 / 840;

// Right-hand side of the state plus first and second variational equations.
class VariationalSystem {
public:
    VariationalSystem(const HamiltonianModel& model, int ncols, std::vector<std::pair<int, int>> pairs)
        : model_(model), d_(model.dim()), k_(ncols), pairs_(std::move(pairs)),
          jac_(static_cast<std::size_t>(d_) * d_), tmp_(d_) {}

    int size() const { return d_ * (1 + k_ + static_cast<int>(pairs_.size())); }

    void operator()(const double* y, double* dy) {
        const std::span<const double> z(y, d_);
        model_.vector_field(z, std::span<double>(dy, d_));
        if (k_ == 0 && pairs_.empty()) return;
        model_.jacobian(z, std::span<double>(jac_.data(), jac_.size()));
        const int ncol = k_ + static_cast<int>(pairs_.size());
        for (int c = 0; c < ncol; ++c) {
            const double* col = y + d_ * (1 + c);
            double* out = dy + d_ * (1 + c);
            for (int r = 0; r < d_; ++r) {
                const double* row = jac_.data() + static_cast<std::size_t>(r) * d_;
                double s = 0;
                for (int q = 0; q < d_; ++q) s += row[q] * col[q];
                out[r] = s;
            }
        }
        for (std::size_t q = 0; q < pairs_.size(); ++q) {
            const double* u = y + d_ * (1 + pairs_[q].first);
            const double* v = y + d_ * (1 + pairs_[q].second);
            model_.hessian_action(z, std::span<const double>(u, d_), std::span<const double>(v, d_),
                                  std::span<double>(tmp_.data(), d_));
            double* out = dy + d_ * (1 + k_ + static_cast<int>(q));
            for (int r = 0; r < d_; ++r) out[r] += tmp_[r];
        }
    }

private:
    const HamiltonianModel& model_;
    int d_, k_;
    std::vector<std::pair<int, int>> pairs_;
    std::vector<double> jac_, tmp_;
};

FlowStats integrate(VariationalSystem& sys, std::vector<double>& y, double t, const IntegratorConfig& cfg) {
    FlowStats stats;
    if (t == 0.0) return stats;
    const int n = sys.size();
    std::vector<double> k(static_cast<std::size_t>(kStages) * n), ys(n), ynew(n);
    const double dir = t > 0 ? 1.0 : -1.0;
    double h = dir * std::min(std::abs(cfg.initial_step), std::abs(t));
    double tt = 0;
    for (;;) {
        const double remaining = t - tt;
        bool last = false;
        if (std::abs(h) >= std::abs(remaining)) {
            h = remaining;
            last = true;
        }
        for (int s = 0; s < kStages; ++s) {
            for (int i = 0; i < n; ++i) {
                double acc = 0;
                for (int r = 0; r < s; ++r) acc += A[s][r] * k[static_cast<std::size_t>(r) * n + i];
                ys[i] = y[i] + h * acc;
            }
            sys(ys.data(), k.data() + static_cast<std::size_t>(s) * n);
        }
        double err = 0;
        for (int i = 0; i < n; ++i) {
            double acc = 0;
            for (int s = 0; s < kStages; ++s) acc += B8[s] * k[static_cast<std::size_t>(s) * n + i];
            ynew[i] = y[i] + h * acc;
            const double est = h * kErr *
                               (k[i] + k[static_cast<std::size_t>(10) * n + i] -
                                k[static_cast<std::size_t>(11) * n + i] - k[static_cast<std::size_t>(12) * n + i]);
            const double scale = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            err = std::max(err, std::abs(est) / scale);
        }
        if (!std::isfinite(err)) throw FlowError("non-finite state during integration");
        double factor = err == 0 ? 5.0 : 0.9 * std::pow(err, -1.0 / 8.0);
        factor = std::clamp(factor, 0.2, 5.0);
        if (err <= 1.0) {
            y.swap(ynew);
            ++stats.steps;
            if (last) return stats;
            tt += h;
        } else {
            ++stats.rejected;
        }
        h *= factor;
        if (std::abs(h) < cfg.min_step) throw FlowError("step size underflow");
        if (stats.steps + stats.rejected > cfg.max_steps) throw FlowError("maximum number of steps exceeded");
    }
}

}  // namespace

void set_default_workers(int workers) { g_workers = workers; }

int default_workers() {
    const int w = g_workers.load();
    if (w > 0) return w;
    return std::max(1u, std::thread::hardware_concurrency());
}

FlowResult flow_variational(const HamiltonianModel& model, const Vec& z0, double t, const Mat& v,
                            const std::vector<std::pair<int, int>>& pairs, const IntegratorConfig& cfg) {
    const int d = model.dim();
    if (z0.size() != d) throw std::invalid_argument("state dimension mismatch");
    const int k = static_cast<int>(v.cols());
    if (k > 0 && v.rows() != d) throw std::invalid_argument("column dimension mismatch");
    for (const auto& [a, b] : pairs)
        if (a < 0 || a >= k || b < 0 || b >= k) throw std::invalid_argument("pair index out of range");

    VariationalSystem sys(model, k, pairs);
    std::vector<double> y(sys.size(), 0.0);
    std::copy(z0.data(), z0.data() + d, y.begin());
    for (int c = 0; c < k; ++c)
        for (int r = 0; r < d; ++r) y[d * (1 + c) + r] = v(r, c);

    FlowResult out;
    out.stats = integrate(sys, y, t, cfg);
    out.endpoint = Eigen::Map<const Vec>(y.data(), d);
    if (k > 0) out.applied = Eigen::Map<const Mat>(y.data() + d, d, k);
    if (!pairs.empty())
        out.second_action = Eigen::Map<const Mat>(y.data() + d * (1 + k), d, static_cast<int>(pairs.size()));
    return out;
}

FlowResult flow_point(const HamiltonianModel& model, const Vec& z0, double t, const IntegratorConfig& cfg) {
    return flow_variational(model, z0, t, Mat(), {}, cfg);
}

FlowResult flow_with_jacobian(const HamiltonianModel& model, const Vec& z0, double t,
                              const IntegratorConfig& cfg) {
    auto r = flow_variational(model, z0, t, Mat::Identity(model.dim(), model.dim()), {}, cfg);
    r.jacobian = std::move(r.applied);
    r.applied.reset();
    return r;
}

FlowResult flow_applied(const HamiltonianModel& model, const Vec& z0, double t, const Mat& v,
                        const IntegratorConfig& cfg) {
    return flow_variational(model, z0, t, v, {}, cfg);
}

FlowResult flow_second_action(const HamiltonianModel& model, const Vec& z0, double t, const Vec& u,
                              const Vec& v, const IntegratorConfig& cfg) {
    Mat cols(model.dim(), 2);
    cols.col(0) = u;
    cols.col(1) = v;
    return flow_variational(model, z0, t, cols, {{0, 1}}, cfg);
}

GridFlowResult flow_grid(const HamiltonianModel& model, const Mat& points, double t,
                         const GridFlowRequest& request, const IntegratorConfig& cfg) {
    const int npts = static_cast<int>(points.rows());
    const int d = model.dim();
    if (points.cols() != d) throw std::invalid_argument("grid points must have one state per row");
    const bool with_cols = !request.columns.empty();
    if (with_cols && static_cast<int>(request.columns.size()) != npts)
        throw std::invalid_argument("one column block per grid point is required");

    GridFlowResult out;
    out.endpoints.resize(npts, d);
    if (with_cols) out.applied.resize(npts);
    if (!request.pairs.empty()) out.second_action.resize(npts);
    std::vector<FlowStats> stats(npts);
    std::vector<char> failed(npts, 0);
    std::vector<std::string> messages(npts);

    parallel_for(npts, cfg.workers, [&](int j) {
        try {
            const Vec z = points.row(j).transpose();
            FlowResult r = flow_variational(model, z, t, with_cols ? request.columns[j] : Mat(), request.pairs, cfg);
            out.endpoints.row(j) = r.endpoint.transpose();
            if (with_cols) out.applied[j] = std::move(*r.applied);
            if (!request.pairs.empty()) out.second_action[j] = std::move(*r.second_action);
            stats[j] = r.stats;
        } catch (const std::exception& e) {
            failed[j] = 1;
            messages[j] = e.what();
        }
    });

    std::vector<int> bad;
    for (int j = 0; j < npts; ++j) {
        if (failed[j]) bad.push_back(j);
        out.stats.steps += stats[j].steps;
        out.stats.rejected += stats[j].rejected;
    }
    if (!bad.empty()) {
        std::string what = "flow failed on " + std::to_string(bad.size()) + " grid point(s), first index " +
                           std::to_string(bad.front()) + ": " + messages[bad.front()];
        throw FlowError(what, bad);
    }
    return out;
}

}  // namespace phtori

#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "phtori/model.hpp"

namespace phtori {

struct IntegratorConfig {
    double abs_tol = 1e-13;
    double rel_tol = 1e-13;
    double initial_step = 1e-2;
    double min_step = 1e-14;
    long max_steps = 200000;
    int workers = 0;  // 0 = default worker count
};

struct FlowStats {
    long steps = 0;
    long rejected = 0;
};

struct FlowResult {
    Vec endpoint;
    std::optional<Mat> jacobian;       // D phi_t
    std::optional<Mat> applied;        // D phi_t V, one column per input column
    std::optional<Mat> second_action;  // D^2 phi_t [V_a, V_b], one column per pair
    FlowStats stats;
};

// Process-wide default for the number of flow_grid workers.
void set_default_workers(int workers);
int default_workers();

FlowResult flow_point(const HamiltonianModel& model, const Vec& z0, double t, const IntegratorConfig& cfg = {});
FlowResult flow_with_jacobian(const HamiltonianModel& model, const Vec& z0, double t,
                              const IntegratorConfig& cfg = {});
// Endpoint plus D phi_t applied to the columns of v (dim x k).
FlowResult flow_applied(const HamiltonianModel& model, const Vec& z0, double t, const Mat& v,
                        const IntegratorConfig& cfg = {});
// Endpoint, D phi_t u, D phi_t v and D^2 phi_t [u, v].
FlowResult flow_second_action(const HamiltonianModel& model, const Vec& z0, double t, const Vec& u,
                              const Vec& v, const IntegratorConfig& cfg = {});

// General variational flow: columns v evolve with the first variational equation,
// each pair (a, b) adds a column C with C' = DX C + D^2X[V_a, V_b], C(0) = 0.
FlowResult flow_variational(const HamiltonianModel& model, const Vec& z0, double t, const Mat& v,
                            const std::vector<std::pair<int, int>>& pairs, const IntegratorConfig& cfg = {});

struct GridFlowRequest {
    // Per grid point columns (dim x k); empty for endpoints only.
    std::vector<Mat> columns;
    std::vector<std::pair<int, int>> pairs;
};

struct GridFlowResult {
    Mat endpoints;  // N x dim
    std::vector<Mat> applied;
    std::vector<Mat> second_action;
    FlowStats stats;
};

// Flows every row of points for time t; results are ordered like the input
// and do not depend on the number of workers.
GridFlowResult flow_grid(const HamiltonianModel& model, const Mat& points, double t,
                         const GridFlowRequest& request = {}, const IntegratorConfig& cfg = {});

// Runs f(0..count-1) on the configured number of workers.
template <class F>
void parallel_for(int count, int workers, F&& f);

}  // namespace phtori

#include "phtori/detail/parallel.hpp"

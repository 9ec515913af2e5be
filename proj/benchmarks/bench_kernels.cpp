#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "phtori/cohomology.hpp"
#include "phtori/frame.hpp"
#include "phtori/seeds.hpp"

using namespace phtori;

namespace {

std::vector<double> noise(int n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::vector<double> v(n);
    for (auto& x : v) x = g(rng);
    return v;
}

const TorusState& torus() {
    static const TorusState s = [] {
        const RtbpModel model;
        const PeriodicOrbit po = lyapunov_po(model, Generator::vertical, PoTarget::with_rotation(0.031865));
        return refine_seed(model, seed_from_po(model, po), RefineConfig{});
    }();
    return s;
}

}  // namespace

static void BM_Transform(benchmark::State& st) {
    const auto v = noise(static_cast<int>(st.range(0)), 1);
    for (auto _ : st) benchmark::DoNotOptimize(PeriodicFunction::from_samples(v));
    st.SetComplexityN(st.range(0));
}
BENCHMARK(BM_Transform)->RangeMultiplier(4)->Range(32, 8192)->Complexity();

static void BM_MultipleSmallDivisor(benchmark::State& st) {
    const int n = static_cast<int>(st.range(0));
    std::vector<PeriodicFunction> etas;
    for (int i = 0; i < 4; ++i) etas.push_back(PeriodicFunction::from_samples(noise(n, 2 + i)));
    const double omega = (std::sqrt(5.0) - 1) / 2;
    for (auto _ : st) benchmark::DoNotOptimize(solve_multiple_small_divisor(etas, omega));
}
BENCHMARK(BM_MultipleSmallDivisor)->RangeMultiplier(4)->Range(32, 2048);

static void BM_FlowPointJacobian(benchmark::State& st) {
    const RtbpModel model;
    const Vec z = torus().K[0].point(0);
    const double t = torus().T / torus().m;
    for (auto _ : st) benchmark::DoNotOptimize(flow_with_jacobian(model, z, t));
}
BENCHMARK(BM_FlowPointJacobian)->Unit(benchmark::kMillisecond);

static void BM_BuildFrame(benchmark::State& st) {
    const RtbpModel model;
    const TorusState s = resample_state(torus(), static_cast<int>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(build_frame(model, s));
}
BENCHMARK(BM_BuildFrame)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_RefineSeed(benchmark::State& st) {
    const RtbpModel model;
    const PeriodicOrbit po = lyapunov_po(model, Generator::vertical, PoTarget::with_rotation(0.031865));
    const TorusState seed = seed_from_po(model, po);
    for (auto _ : st) benchmark::DoNotOptimize(refine_seed(model, seed, RefineConfig{}));
}
BENCHMARK(BM_RefineSeed)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();

#include <gtest/gtest.h>

#include <cmath>

#include "phtori/continuation.hpp"
#include "phtori/errors.hpp"
#include "support/normal_form.hpp"
#include "support/rtbp_fixture.hpp"

using namespace phtori;
using phtori::testing::NormalFormModel;

namespace {

std::vector<long> continued_fraction(double x, int terms) {
    std::vector<long> a;
    for (int k = 0; k < terms; ++k) {
        const double f = std::floor(x);
        a.push_back(static_cast<long>(f));
        x -= f;
        if (x < 1e-12) break;
        x = 1 / x;
    }
    return a;
}

double rel_diff(const std::vector<CurveMap>& a, const std::vector<CurveMap>& b, const std::vector<CurveMap>& t,
                double d) {
    double num = 0, den = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const Mat s = (b[i].samples() - a[i].samples()) / d;
        num += (s - t[i].samples()).squaredNorm();
        den += t[i].samples().squaredNorm();
    }
    return std::sqrt(num / den);
}

double energy_pairing(const HamiltonianModel& model, const TorusState& s, const CurveMap& dk) {
    double acc = 0;
    for (int j = 0; j < s.N(); ++j) acc += model.gradient(s.K[0].point(j)).dot(dk.point(j));
    return acc / s.N();
}

}  // namespace

TEST(Continuation, ParameterNames) {
    for (Parameter p : {Parameter::T, Parameter::h, Parameter::omega}) EXPECT_EQ(parse_parameter(to_string(p)), p);
    EXPECT_THROW(parse_parameter("rho"), ConfigError);
}

TEST(Nobilize, TailOfOnes) {
    const double golden = (std::sqrt(5.0) - 1) / 2;
    EXPECT_NEAR(nobilize(golden), golden, 1e-15);
    for (double x : {0.031865, 0.2345, 0.61}) {
        const double y = nobilize(x, 1.6e-4);
        EXPECT_LE(std::abs(y - x), 1.6e-4);
        const auto cf = continued_fraction(y, 30);
        ASSERT_GE(cf.size(), 12u);
        // From some position on every coefficient is one (until rounding takes over).
        int ones = 0;
        for (std::size_t k = cf.size() / 2; k < cf.size() - 2; ++k) ones += cf[k] == 1;
        EXPECT_EQ(ones, static_cast<int>(cf.size() - 2 - cf.size() / 2)) << x;
    }
    EXPECT_EQ(nobilize(0.25, 0.0), 0.25);
}

TEST(Continuation, ConfigValidation) {
    ContinuationConfig c;
    EXPECT_NO_THROW(c.validate());
    c.eps2 = 1e-7;
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Continuation, PredictorNormalization) {
    const NormalFormModel model;
    const TorusState s = model.exact_torus(0.3, 0.2, 4, 32);
    const TangentData t = tangent_T(model, s, build_frame(model, s));
    const double alpha = 1e-3;
    const TorusState p = predictor(s, t, alpha);
    std::vector<CurveMap> dk, dw;
    for (int i = 0; i < s.m; ++i) {
        dk.push_back(p.K[i] - s.K[i]);
        dw.push_back(p.W[i] - s.W[i]);
    }
    EXPECT_NEAR(compound_norm(dk, dw, p.T - s.T, p.lambda - s.lambda), alpha, 1e-12);
    EXPECT_GT(p.T, s.T);

    const TorusState same = predictor(s, t, 0.0);
    RefineReport rep;
    refine(model, same, RefineConfig{}, &rep);
    EXPECT_LE(rep.iterations, 1);
}

TEST(Continuation, HyperbolicComponentsVanish) {
    const NormalFormModel model;
    const TorusState s = model.exact_torus(0.3, 0.2, 4, 32);
    const AdaptedFrame fr = build_frame(model, s);
    for (Parameter tag : {Parameter::T, Parameter::h, Parameter::omega}) {
        const TangentData t = tangent(model, s, fr, tag);
        for (const Mat& xi : t.xi_torus) {
            EXPECT_EQ(xi.col(2).cwiseAbs().maxCoeff(), 0.0);
            EXPECT_EQ(xi.col(5).cwiseAbs().maxCoeff(), 0.0);
        }
    }
    EXPECT_EQ(tangent_T(model, s, fr).dT, 1.0);
}

TEST(Continuation, EnergyNormalization) {
    const NormalFormModel model;
    const TorusState s = model.exact_torus(0.3, 0.2, 4, 32);
    const AdaptedFrame fr = build_frame(model, s);
    EXPECT_NEAR(energy_pairing(model, s, tangent_h(model, s, fr).dK[0]), 1.0, 1e-8);
    EXPECT_NEAR(energy_pairing(model, s, tangent_omega(model, s, fr).dK[0]), 0.0, 1e-8);
}

TEST(Continuation, TangentsMatchSecants) {
    const NormalFormModel model;
    const TorusState s = phase_align(model.exact_torus(0.3, 0.2, 4, 32), 0);
    const double d = 1e-5;
    for (Parameter tag : {Parameter::T, Parameter::h, Parameter::omega}) {
        const TangentData t = phase_align(s, tangent(model, s, build_frame(model, s), tag), 0);
        TorusState p = s;
        if (tag == Parameter::T) p.T += d;
        if (tag == Parameter::h) p.h += d;
        if (tag == Parameter::omega) p.omega += d;
        RefineConfig rc;
        rc.eps = 1e-13;
        rc.eps_w = 1e-12;
        rc.mode = tag == Parameter::T ? NewtonMode::isochronous : NewtonMode::isoenergetic;
        const TorusState q = phase_align(refine(model, p, rc), 0);
        EXPECT_LT(rel_diff(s.K, q.K, t.dK, d), 1e-2) << to_string(tag);
        EXPECT_NEAR(t.dT, (q.T - s.T) / d, 1e-2 * std::abs(t.dT) + 1e-6) << to_string(tag);
        EXPECT_NEAR(t.dlambda, (q.lambda - s.lambda) / d, 1e-2 * std::abs(t.dlambda) + 1e-6) << to_string(tag);
    }
}

TEST(Continuation, PhaseAlignment) {
    const NormalFormModel model;
    TorusState s = model.exact_torus(0.3, 0.2, 4, 32);
    for (int i = 0; i < s.m; ++i) s.K[i] = rotate(s.K[i], 0.1);
    const TorusState a = phase_align(s, 0);
    EXPECT_NEAR(first_harmonic_phase(a, 0), 0.0, 1e-14);
    EXPECT_LT(torus_error(model, a).err, 1e-12);
}

TEST(Continuation, StepSizeLaw) {
    const NormalFormModel model;
    ContinuationConfig cfg;
    cfg.n_min = 32;
    cfg.alpha_max = 1e-2;
    const StepOutcome o = continuation_step(model, model.exact_torus(0.3, 0.2, 4, 32), 1e-3, cfg);
    const double expected = std::clamp(o.alpha_used * cfg.n_des / std::max(o.newton_iterations, 1), cfg.alpha_min,
                                       cfg.alpha_max);
    EXPECT_DOUBLE_EQ(o.alpha_next, expected);
    EXPECT_LT(o.state.err, cfg.eps);
    EXPECT_LT(o.state.err_w, cfg.eps_w);
    EXPECT_TRUE(o.log.empty());  // only restarts and resizes are logged
}

TEST(Family, SingleRecord) {
    const NormalFormModel model;
    ContinuationConfig cfg;
    cfg.max_tori = 1;
    cfg.observables.n2 = 16;
    int seen = 0;
    const FamilyResult r = run_family(model, model.exact_torus(0.3, 0.2, 4, 32), cfg, [&](const FamilyEntry&) {
        ++seen;
        return true;
    });
    EXPECT_EQ(seen, 1);
    EXPECT_EQ(r.accepted, 1);
}

TEST(Family, TimeIncreasesAlongRtbpFamily) {
    ContinuationConfig cfg;
    cfg.max_tori = 4;
    cfg.observables.n2 = 32;
    std::vector<double> times;
    run_family(phtori::testing::earth_moon(), phtori::testing::narrow_torus(), cfg, [&](const FamilyEntry& e) {
        times.push_back(e.state.T);
        EXPECT_LT(e.state.err, cfg.eps);
        EXPECT_LT(e.state.err_w, cfg.eps_w);
        return true;
    });
    ASSERT_EQ(times.size(), 4u);
    for (std::size_t k = 1; k < times.size(); ++k) EXPECT_GT(times[k], times[k - 1]);
}

TEST(Family, ParameterBoundStops) {
    const NormalFormModel model;
    const TorusState s = model.exact_torus(0.3, 0.2, 4, 32);
    ContinuationConfig cfg;
    cfg.max_tori = 50;
    cfg.param_max = s.T + 2e-3;
    cfg.observables.n2 = 16;
    const FamilyResult r = run_family(model, s, cfg);
    EXPECT_LT(r.accepted, 50);
    EXPECT_NE(r.stop_reason.find("parameter"), std::string::npos) << r.stop_reason;
}

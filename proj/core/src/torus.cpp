#include "phtori/torus.hpp"

#include <cmath>
#include <stdexcept>

#include "phtori/errors.hpp"

namespace phtori {

std::string to_string(Generator g) { return g == Generator::vertical ? "vertical" : "planar"; }
std::string to_string(BundleKind b) { return b == BundleKind::stable ? "stable" : "unstable"; }

Generator parse_generator(const std::string& s) {
    if (s == "vertical") return Generator::vertical;
    if (s == "planar") return Generator::planar;
    throw ConfigError("unknown generator '" + s + "'");
}

BundleKind parse_bundle(const std::string& s) {
    if (s == "stable") return BundleKind::stable;
    if (s == "unstable") return BundleKind::unstable;
    throw ConfigError("unknown bundle kind '" + s + "'");
}

void TorusState::validate() const {
    if (m < 1) throw std::invalid_argument("need at least one leg");
    if (static_cast<int>(K.size()) != m || static_cast<int>(W.size()) != m)
        throw std::invalid_argument("K and W must hold m curves");
    const int n_grid = N();
    for (int i = 0; i < m; ++i) {
        if (K[i].dim() != dim() || W[i].dim() != dim()) throw std::invalid_argument("curve dimension mismatch");
        if (K[i].size() != n_grid || W[i].size() != n_grid) throw std::invalid_argument("curves must share N");
    }
}

double mean_energy(const HamiltonianModel& model, const CurveMap& k) {
    const Mat s = k.samples();
    double acc = 0;
    for (int j = 0; j < s.rows(); ++j) {
        const Vec z = s.row(j).transpose();
        acc += model.hamiltonian(z);
    }
    return acc / s.rows();
}

TorusError torus_error(const HamiltonianModel& model, const TorusState& state, const IntegratorConfig& cfg) {
    state.validate();
    TorusError out;
    out.E.resize(state.m);
    for (int i = 0; i < state.m; ++i) {
        const auto flowed = flow_grid(model, state.K[i].samples(), state.T / state.m, {}, cfg);
        const Mat target = rotate(state.K[(i + 1) % state.m], state.omega / state.m).samples();
        const Mat e = flowed.endpoints - target;
        out.err = std::max(out.err, e.cwiseAbs().maxCoeff());
        out.E[i] = CurveMap::from_samples(e);
    }
    out.energy_error = mean_energy(model, state.K[0]) - state.h;
    return out;
}

double compound_norm(const std::vector<CurveMap>& K, const std::vector<CurveMap>& W, double T, double lambda) {
    double acc = T * T + lambda * lambda;
    auto add = [&acc](const CurveMap& c) {
        const Mat s = c.samples();
        acc += s.rowwise().squaredNorm().mean();
    };
    for (const auto& k : K) add(k);
    for (const auto& w : W) add(w);
    return std::sqrt(acc);
}

TorusState resample_state(const TorusState& s, int n_new, int tail_cutoff) {
    TorusState out = s;
    const bool down = n_new < s.N();
    for (int i = 0; i < s.m; ++i) {
        const CurveMap k = down ? clean_tail(s.K[i], tail_cutoff < 0 ? n_new / 4 : tail_cutoff) : s.K[i];
        const CurveMap w = down ? clean_tail(s.W[i], tail_cutoff < 0 ? n_new / 4 : tail_cutoff) : s.W[i];
        out.K[i] = resample(k, n_new);
        out.W[i] = resample(w, n_new);
    }
    return out;
}

TorusState clean_state(const TorusState& s, int tail_cutoff) {
    TorusState out = s;
    for (int i = 0; i < s.m; ++i) {
        out.K[i] = clean_tail(s.K[i], tail_cutoff);
        out.W[i] = clean_tail(s.W[i], tail_cutoff);
    }
    return out;
}

TorusState canonicalize(const TorusState& s) {
    TorusState out = s;
    for (int i = 0; i < s.m; ++i) {
        out.K[i] = CurveMap::from_samples(s.K[i].samples());
        out.W[i] = CurveMap::from_samples(s.W[i].samples());
    }
    return out;
}

double unstable_multiplier(const TorusState& s) {
    const double a = std::pow(std::abs(s.lambda), s.m);
    return std::max(a, 1.0 / a);
}

}  // namespace phtori

#include "phtori/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "phtori/errors.hpp"

namespace phtori {

namespace {

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used == v.size() && std::isfinite(x)) return x;
    } catch (const std::exception&) {
    }
    throw ConfigError("bad number for '" + key + "': '" + v + "'");
}

long parse_long(const std::string& key, const std::string& v) {
    long x = 0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size()) throw ConfigError("bad integer for '" + key + "': '" + v + "'");
    return x;
}

int parse_int(const std::string& key, const std::string& v) { return static_cast<int>(parse_long(key, v)); }

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "1" || v == "true" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "no") return false;
    throw ConfigError("bad boolean for '" + key + "': '" + v + "'");
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = [] {
        std::map<std::string, Setter> t;
        auto d = [&](const char* k, auto member) {
            t[k] = [member](RunConfig& c, const std::string& key, const std::string& v) {
                member(c) = parse_double(key, v);
            };
        };
        auto i = [&](const char* k, auto member) {
            t[k] = [member](RunConfig& c, const std::string& key, const std::string& v) {
                member(c) = parse_int(key, v);
            };
        };
        d("mu", [](RunConfig& c) -> double& { return c.mu; });
        d("rho", [](RunConfig& c) -> double& { return c.rho; });
        d("amplitude", [](RunConfig& c) -> double& { return c.amplitude; });
        i("m", [](RunConfig& c) -> int& { return c.m; });
        i("N", [](RunConfig& c) -> int& { return c.N; });
        i("workers", [](RunConfig& c) -> int& { return c.workers; });
        i("surface.n1", [](RunConfig& c) -> int& { return c.surface_n1; });
        i("surface.n2", [](RunConfig& c) -> int& { return c.surface_n2; });
        t["family"] = [](RunConfig& c, const std::string&, const std::string& v) { c.family = parse_generator(v); };
        t["bundle"] = [](RunConfig& c, const std::string&, const std::string& v) { c.bundle = parse_bundle(v); };
        t["output"] = [](RunConfig& c, const std::string&, const std::string& v) { c.output = v; };
        t["family_dir"] = [](RunConfig& c, const std::string&, const std::string& v) { c.family_dir = v; };

        t["integrator.tol"] = [](RunConfig& c, const std::string& key, const std::string& v) {
            const double x = parse_double(key, v);
            c.continuation.integrator.abs_tol = x;
            c.continuation.integrator.rel_tol = x;
        };
        d("integrator.abs_tol", [](RunConfig& c) -> double& { return c.continuation.integrator.abs_tol; });
        d("integrator.rel_tol", [](RunConfig& c) -> double& { return c.continuation.integrator.rel_tol; });
        d("integrator.initial_step", [](RunConfig& c) -> double& { return c.continuation.integrator.initial_step; });
        d("integrator.min_step", [](RunConfig& c) -> double& { return c.continuation.integrator.min_step; });
        t["integrator.max_steps"] = [](RunConfig& c, const std::string& key, const std::string& v) {
            c.continuation.integrator.max_steps = parse_long(key, v);
        };
        d("cohomology.divisor_floor",
          [](RunConfig& c) -> double& { return c.continuation.newton.cohomology.divisor_floor; });
        d("newton.twist_limit", [](RunConfig& c) -> double& { return c.continuation.newton.twist_limit; });
        i("newton.tail_cutoff", [](RunConfig& c) -> int& { return c.continuation.tail_cutoff; });
        t["frame.constant_torsion"] = [](RunConfig& c, const std::string& key, const std::string& v) {
            c.continuation.frame.constant_torsion = parse_bool(key, v);
        };

        t["continuation.parameter"] = [](RunConfig& c, const std::string&, const std::string& v) {
            c.continuation.tag = parse_parameter(v);
        };
        d("continuation.alpha", [](RunConfig& c) -> double& { return c.continuation.alpha; });
        d("continuation.alpha_min", [](RunConfig& c) -> double& { return c.continuation.alpha_min; });
        d("continuation.alpha_max", [](RunConfig& c) -> double& { return c.continuation.alpha_max; });
        d("continuation.eps", [](RunConfig& c) -> double& { return c.continuation.eps; });
        d("continuation.eps_w", [](RunConfig& c) -> double& { return c.continuation.eps_w; });
        d("continuation.eps1", [](RunConfig& c) -> double& { return c.continuation.eps1; });
        d("continuation.eps2", [](RunConfig& c) -> double& { return c.continuation.eps2; });
        d("continuation.halving_gate", [](RunConfig& c) -> double& { return c.continuation.halving_gate; });
        i("continuation.n_des", [](RunConfig& c) -> int& { return c.continuation.n_des; });
        i("continuation.n_alpha", [](RunConfig& c) -> int& { return c.continuation.n_alpha; });
        i("continuation.n_min", [](RunConfig& c) -> int& { return c.continuation.n_min; });
        i("continuation.n_max", [](RunConfig& c) -> int& { return c.continuation.n_max; });
        i("continuation.max_iters", [](RunConfig& c) -> int& { return c.continuation.max_iters; });
        i("continuation.max_tori", [](RunConfig& c) -> int& { return c.continuation.max_tori; });
        d("continuation.calabi_floor", [](RunConfig& c) -> double& { return c.continuation.calabi_floor; });
        d("continuation.param_min", [](RunConfig& c) -> double& { return c.continuation.param_min; });
        d("continuation.param_max", [](RunConfig& c) -> double& { return c.continuation.param_max; });
        d("continuation.nobilize_tol", [](RunConfig& c) -> double& { return c.continuation.nobilize_tol; });
        i("observables.n2", [](RunConfig& c) -> int& { return c.continuation.observables.n2; });

        d("po.tol", [](RunConfig& c) -> double& { return c.po.tol; });
        i("po.max_iters", [](RunConfig& c) -> int& { return c.po.max_iters; });
        d("po.amplitude_step", [](RunConfig& c) -> double& { return c.po.amplitude_step; });
        d("po.max_amplitude", [](RunConfig& c) -> double& { return c.po.max_amplitude; });
        return t;
    }();
    return table;
}

}  // namespace

double RunConfig::omega() const { return family == Generator::vertical ? rho : 1 - 1 / (1 + rho); }

RtbpParams RunConfig::model_params() const {
    RtbpParams p;
    p.mu = mu;
    return p;
}

IntegratorConfig RunConfig::integrator() const {
    IntegratorConfig c = continuation.integrator;
    c.workers = workers;
    return c;
}

RefineConfig RunConfig::refine() const {
    RefineConfig r = continuation.refine_config(continuation.eps);
    r.integrator = integrator();
    return r;
}

SeedConfig RunConfig::seed() const {
    SeedConfig s;
    s.amplitude = amplitude;
    s.m = m;
    s.N = N;
    s.bundle = bundle;
    s.integrator = integrator();
    return s;
}

std::string RunConfig::family_name() const {
    std::ostringstream os;
    os.precision(10);
    os << to_string(family) << "-rho" << rho;
    return os.str();
}

void RunConfig::set(const std::string& key, const std::string& value) {
    const auto& t = setters();
    auto it = t.find(key);
    if (it == t.end()) throw ConfigError("unknown configuration key '" + key + "'");
    it->second(*this, key, value);
}

void RunConfig::validate() const {
    if (!(mu > 0 && mu < 0.5)) throw ConfigError("mu must lie in (0, 1/2)");
    if (!(rho > 0 && rho < 1)) throw ConfigError("rho must lie in (0, 1)");
    if (!(amplitude > 0)) throw ConfigError("amplitude must be positive");
    if (m < 1) throw ConfigError("m must be positive");
    if (N < 4 || !is_power_of_two(N)) throw ConfigError("N must be a power of two, at least 4");
    if (workers < 0) throw ConfigError("workers must be nonnegative");
    if (surface_n1 < 1 || surface_n2 < 1) throw ConfigError("surface sizes must be positive");
    if (!(continuation.integrator.abs_tol > 0 && continuation.integrator.rel_tol > 0))
        throw ConfigError("integrator tolerances must be positive");
    if (!(continuation.newton.cohomology.divisor_floor >= 0)) throw ConfigError("divisor floor must be nonnegative");
    if (continuation.observables.n2 < 2) throw ConfigError("observables.n2 must be at least 2");
    continuation.validate();
}

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& [k, v] : setters()) keys.push_back(k);
    return keys;
}

void load_config(RunConfig& cfg, std::istream& is, const std::string& source) {
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source + ":" + std::to_string(lineno) + ": expected key = value");
        try {
            cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError(source + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

void load_config(RunConfig& cfg, const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open configuration file " + path.string());
    load_config(cfg, f, path.string());
}

}  // namespace phtori

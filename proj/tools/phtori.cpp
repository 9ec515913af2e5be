#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "phtori/config.hpp"
#include "phtori/diagnostics.hpp"
#include "phtori/errors.hpp"
#include "phtori/persistence.hpp"

namespace fs = std::filesystem;
using namespace phtori;

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kNumerical = 3, kIo = 4 };

struct Options {
    std::string config_path;
    std::vector<std::string> sets;
    int threads = -1;
    bool dry_run = false;

    // seed
    std::string family, bundle;
    double rho = -1, amp = -1;
    int m = -1, N = -1;
    std::string output;

    // refine / continue / post-processing
    std::string input;
    std::string mode = "isochronous";
    double eps = -1;
    int resample = -1;
    std::string dir;
    std::string param;
    int max_tori = -1;
    bool resume = false;
    int n1 = -1, n2 = -1;
    std::string diagnostic;
};

RunConfig make_config(const Options& o) {
    RunConfig cfg;
    std::string path = o.config_path;
    if (path.empty())
        if (const char* env = std::getenv(kConfigEnv)) path = env;
    if (!path.empty()) load_config(cfg, fs::path(path));
    for (const auto& kv : o.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!o.family.empty()) cfg.set("family", o.family);
    if (!o.bundle.empty()) cfg.set("bundle", o.bundle);
    if (o.rho > 0) cfg.rho = o.rho;
    if (o.amp > 0) cfg.amplitude = o.amp;
    if (o.m > 0) cfg.m = o.m;
    if (o.N > 0) cfg.N = o.N;
    if (!o.output.empty()) cfg.output = o.output;
    if (!o.dir.empty()) cfg.family_dir = o.dir;
    if (!o.param.empty()) cfg.set("continuation.parameter", o.param);
    if (o.max_tori > 0) cfg.continuation.max_tori = o.max_tori;
    if (o.n1 > 0) cfg.surface_n1 = o.n1;
    if (o.n2 > 0) cfg.surface_n2 = o.n2;
    if (o.threads >= 0) cfg.workers = o.threads;
    cfg.continuation.integrator.workers = cfg.workers;
    cfg.continuation.observables.integrator = cfg.continuation.integrator;
    cfg.po.integrator = cfg.continuation.integrator;
    cfg.validate();
    return cfg;
}

void print_observables(std::ostream& os, const ObservableRecord& r) {
    os << std::setprecision(12);
    os << "T                   " << r.T << '\n'
       << "omega               " << r.omega << '\n'
       << "h                   " << r.h << '\n'
       << "Lambda_u            " << r.unstable_multiplier << '\n'
       << "floquet_exponent    " << r.floquet_exponent << '\n'
       << "C1                  " << r.c1 << '\n'
       << "C2                  " << r.c2 << '\n'
       << "R1                  " << r.r1 << '\n'
       << "R2                  " << r.r2 << '\n'
       << "d(TK,X)             " << r.distances.tangent_field << '\n'
       << "d(Es,Eu)            " << r.distances.stable_unstable << '\n'
       << "d(Es,Ec)            " << r.distances.stable_center << '\n'
       << "d(Eu,Ec)            " << r.distances.unstable_center << '\n'
       << "omega_p             " << r.frequencies.omega_p << '\n'
       << "omega_v             " << r.frequencies.omega_v << '\n'
       << "nu_p                " << r.frequencies.nu_p << '\n'
       << "nu_v                " << r.frequencies.nu_v << '\n'
       << "N                   " << r.N << '\n'
       << "m                   " << r.m << '\n';
}

// Rejects omega when some divisor |1 - e^{2 pi i k omega}|, 0 < k <= N/2, falls below the floor.
void check_resonance(double omega, int N, double floor) {
    for (int k = 1; k <= N / 2; ++k) {
        const double div = std::abs(1.0 - std::polar(1.0, 2 * std::numbers::pi * k * omega));
        if (div < floor) {
            std::ostringstream os;
            os << "rotation number " << omega << " is resonant on an " << N << "-point grid: k=" << k
               << ", |divisor|=" << div << " below " << floor;
            throw ConfigError(os.str());
        }
    }
}

RtbpModel model_for(const TorusRecord& r) {
    RtbpParams p;
    p.mu = r.mu;
    return RtbpModel(p);
}

int cmd_seed(const Options& o) {
    const RunConfig cfg = make_config(o);
    check_resonance(cfg.omega(), cfg.N, cfg.continuation.newton.cohomology.divisor_floor);
    if (o.dry_run) {
        std::cout << "configuration valid\n";
        return kOk;
    }
    const RtbpModel model(cfg.model_params());
    const PeriodicOrbit po = lyapunov_po(model, cfg.family, PoTarget::with_rotation(cfg.omega()), nullptr, cfg.po);
    std::cerr << std::setprecision(10) << "periodic orbit: period " << po.period << ", h " << po.h
              << ", nu " << po.nu << ", closure " << po.closure_error << '\n';
    TorusState seed = seed_from_po(model, po, cfg.seed());
    RefineReport rep;
    RefineConfig rc = cfg.refine();
    const TorusState state = refine_seed(model, seed, rc, &rep);
    std::cerr << "refined in " << rep.iterations << " iterations: err " << state.err << ", errW " << state.err_w << '\n';

    TorusRecord rec;
    rec.family = cfg.family_name();
    rec.index = 0;
    rec.parent = -1;
    rec.tag = "seed";
    rec.mu = cfg.mu;
    rec.state = state;
    rec.observables = compute_observables(model, state, cfg.continuation.observables);
    write_record(rec, fs::path(cfg.output));
    std::cout << cfg.output << '\n';
    return kOk;
}

int cmd_refine(const Options& o) {
    const RunConfig cfg = make_config(o);
    if (o.input.empty()) throw ConfigError("refine needs --input");
    if (o.mode != "isochronous" && o.mode != "isoenergetic") throw ConfigError("unknown mode '" + o.mode + "'");
    if (o.dry_run) {
        std::cout << "configuration valid\n";
        return kOk;
    }
    TorusRecord rec = read_record(fs::path(o.input));
    const RtbpModel model = model_for(rec);
    TorusState state = rec.state;
    if (o.resample > 0) {
        if (!is_power_of_two(o.resample)) throw ConfigError("--resample must be a power of two");
        state = resample_state(state, o.resample, cfg.continuation.tail_cutoff);
    }
    RefineConfig rc = cfg.refine();
    rc.mode = o.mode == "isochronous" ? NewtonMode::isochronous : NewtonMode::isoenergetic;
    if (o.eps > 0) rc.eps = o.eps;
    RefineReport rep;
    rec.state = refine(model, state, rc, &rep);
    rec.parent = rec.index;
    rec.tag = "refine";
    rec.observables = compute_observables(model, rec.state, cfg.continuation.observables);
    const std::string out = o.output.empty() ? o.input : o.output;
    write_record(rec, fs::path(out));
    std::cerr << "refined in " << rep.iterations << " iterations: err " << rec.state.err << ", errW "
              << rec.state.err_w << '\n';
    std::cout << out << '\n';
    return kOk;
}

int cmd_continue(const Options& o) {
    const RunConfig cfg = make_config(o);
    const fs::path dir(cfg.family_dir);
    if (!o.resume && o.input.empty()) throw ConfigError("continue needs --input (a seed record) or --resume");
    if (o.dry_run) {
        std::cout << "configuration valid\n";
        return kOk;
    }
    fs::create_directories(dir);
    const std::string tag = to_string(cfg.continuation.tag);

    TorusRecord start;
    int first_index = 0;
    double alpha = -1;
    bool emit_start = true;
    if (o.resume) {
        const auto entries = family_index(dir);
        if (entries.empty()) throw IoError("nothing to resume in " + dir.string());
        start = read_record(dir / entries.back().file);
        if (start.tag != tag) throw ConfigError("family was continued in " + start.tag + ", not " + tag);
        first_index = start.index;
        alpha = start.alpha_next;
        emit_start = false;
    } else {
        const auto existing = family_index(dir);
        if (!existing.empty())
            throw ConfigError(dir.string() + " already holds records; use --resume or another directory");
        start = read_record(fs::path(o.input));
        start.index = 0;
        start.parent = -1;
    }
    const RtbpModel model = model_for(start);
    ContinuationConfig cc = cfg.continuation;

    fs::path last_good = o.resume ? record_path(dir, start.index) : fs::path();
    const auto t0 = std::chrono::steady_clock::now();
    auto sink = [&](const FamilyEntry& e) {
        TorusRecord r;
        r.family = start.family;
        r.index = e.index;
        r.parent = e.index == 0 ? -1 : e.index - 1;
        r.tag = tag;
        r.alpha_used = e.alpha_used;
        r.alpha_next = e.alpha_next;
        r.mu = start.mu;
        r.state = e.state;
        r.observables = e.observables;
        last_good = record_path(dir, e.index);
        write_record(r, last_good);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cerr << std::setprecision(8) << "torus " << e.index << ": T " << e.state.T << " h " << e.state.h
                  << " N " << e.state.N() << " C1 " << e.observables.c1 << " alpha " << e.alpha_used << " ("
                  << std::setprecision(3) << secs << " s)\n";
        return true;
    };
    FamilyResult res;
    try {
        res = run_family(model, start.state, cc, sink, first_index, alpha, emit_start);
    } catch (const NumericalError&) {
        update_index(dir);
        if (!last_good.empty()) std::cerr << "last good record: " << last_good.string() << '\n';
        throw;
    }
    update_index(dir);
    std::cerr << "stopped: " << res.stop_reason << '\n';
    if (!last_good.empty()) std::cout << last_good.string() << '\n';
    if (res.stop_reason.rfind("budget exhausted", 0) == 0) {
        std::cerr << "last good record: " << last_good.string() << '\n';
        return kNumerical;
    }
    return kOk;
}

int cmd_observe(const Options& o) {
    const RunConfig cfg = make_config(o);
    if (o.input.empty()) throw ConfigError("observe needs --input");
    if (o.dry_run) {
        std::cout << "configuration valid\n";
        return kOk;
    }
    const TorusRecord rec = read_record(fs::path(o.input));
    const RtbpModel model = model_for(rec);
    const ObservableRecord obs = compute_observables(model, rec.state, cfg.continuation.observables);
    std::cout << "record              " << o.input << '\n'
              << "family              " << rec.family << '\n'
              << "index               " << rec.index << '\n'
              << std::setprecision(3) << "err                 " << rec.state.err << '\n'
              << "errW                " << rec.state.err_w << '\n';
    print_observables(std::cout, obs);
    return kOk;
}

int cmd_export_surface(const Options& o) {
    const RunConfig cfg = make_config(o);
    if (o.input.empty()) throw ConfigError("export-surface needs --input");
    if (o.output.empty()) throw ConfigError("export-surface needs --output");
    if (o.dry_run) {
        std::cout << "configuration valid\n";
        return kOk;
    }
    const TorusRecord rec = read_record(fs::path(o.input));
    const RtbpModel model = model_for(rec);
    const Surface s = globalize_surface(model, rec.state, cfg.surface_n1, cfg.surface_n2, cfg.integrator());
    std::ostringstream os;
    write_surface(os, rec.state, s);
    write_file_atomic(fs::path(o.output), os.str());
    std::cout << o.output << '\n';
    return kOk;
}

int cmd_diagnose(const Options& o) {
    const RunConfig cfg = make_config(o);
    if (o.input.empty()) throw ConfigError("diagnose needs --input");
    if (o.diagnostic != "cancellation" && o.diagnostic != "twist" && o.diagnostic != "frame")
        throw ConfigError("unknown diagnostic '" + o.diagnostic + "' (cancellation, twist or frame)");
    if (o.dry_run) {
        std::cout << "configuration valid\n";
        return kOk;
    }
    const TorusRecord rec = read_record(fs::path(o.input));
    const RtbpModel model = model_for(rec);
    std::cout << std::setprecision(6);
    if (o.diagnostic == "cancellation") {
        const auto r = cancellation_scaling(model, rec.state, {1e-3, 1e-4, 1e-5}, 8, 1, cfg.integrator(),
                                            cfg.continuation.frame);
        std::cout << "delta        err          |<eta3>|\n";
        for (const auto& p : r.points)
            std::cout << std::scientific << p.delta << "  " << p.err << "  " << p.eta3_mean << '\n';
        std::cout << std::defaultfloat << "slope " << r.slope << '\n';
    } else {
        const AdaptedFrame frame = build_frame(model, rec.state, cfg.integrator(), cfg.continuation.frame);
        if (o.diagnostic == "twist") {
            const TwistReport t = twist_report(frame);
            std::cout << "<S1> (isochronous)\n" << t.isochronous << '\n'
                      << "det " << t.isochronous_det << "  cond " << t.isochronous_cond << '\n'
                      << "bordered (isoenergetic)\n" << t.bordered << '\n'
                      << "det " << t.bordered_det << "  cond " << t.bordered_cond << '\n';
        } else {
            const FrameQuality q = frame_quality(frame);
            std::cout << std::scientific << "reduction_residual   " << q.reduction_residual << '\n'
                      << "symplecticity_defect " << q.symplecticity_defect << '\n'
                      << "torsion_symmetry     " << q.torsion_symmetry << '\n'
                      << "lagrangian_defect    " << q.lagrangian_defect << '\n'
                      << "torsion_spread       " << q.torsion_spread << '\n'
                      << "err                  " << frame.err << '\n'
                      << "errW                 " << frame.err_w << '\n';
        }
    }
    return kOk;
}

int cmd_index(const Options& o) {
    const RunConfig cfg = make_config(o);
    if (o.dry_run) {
        std::cout << "configuration valid\n";
        return kOk;
    }
    const auto entries = update_index(fs::path(cfg.family_dir));
    write_index(std::cout, entries);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Partially hyperbolic invariant tori of the spatial RTBP"};
    app.require_subcommand(1);
    Options o;
    app.add_option("-c,--config", o.config_path, std::string("key=value configuration file (default: $") + kConfigEnv + ")");
    app.add_option("--set", o.sets, "Override one configuration key, key=value")->take_all();
    app.add_option("--threads", o.threads, "Worker threads for flow grids (0 = all cores)")->check(CLI::NonNegativeNumber);
    app.add_flag("--dry-run", o.dry_run, "Validate the configuration and exit");

    auto* seed = app.add_subcommand("seed", "Seed and refine a torus around a Lyapunov periodic orbit");
    seed->add_option("--family", o.family, "vertical or planar");
    seed->add_option("--rho", o.rho, "Rotation number of the family");
    seed->add_option("--amp", o.amp, "Seed amplitude");
    seed->add_option("-m", o.m, "Number of shooting legs");
    seed->add_option("-N", o.N, "Grid size");
    seed->add_option("--bundle", o.bundle, "stable or unstable");
    seed->add_option("-o,--output", o.output, "Record to write");

    auto* refine_cmd = app.add_subcommand("refine", "Run Newton on a stored torus");
    refine_cmd->add_option("-i,--input", o.input, "Record to refine")->required();
    refine_cmd->add_option("-o,--output", o.output, "Record to write (default: overwrite input)");
    refine_cmd->add_option("--mode", o.mode, "isochronous or isoenergetic");
    refine_cmd->add_option("--eps", o.eps, "Invariance tolerance");
    refine_cmd->add_option("--resample", o.resample, "Resample to this grid size first");

    auto* cont = app.add_subcommand("continue", "Continue a family and checkpoint every torus");
    cont->add_option("-i,--input", o.input, "Starting record");
    cont->add_option("-d,--dir", o.dir, "Family directory");
    cont->add_option("--param", o.param, "T, h or omega");
    cont->add_option("--max-tori", o.max_tori, "Total number of tori in the family");
    cont->add_flag("--resume", o.resume, "Continue from the last record in the directory");

    auto* observe = app.add_subcommand("observe", "Print the observables of a record");
    observe->add_option("-i,--input", o.input, "Record")->required();

    auto* surface = app.add_subcommand("export-surface", "Write the 2-torus as a sampled surface");
    surface->add_option("-i,--input", o.input, "Record")->required();
    surface->add_option("-o,--output", o.output, "Surface file")->required();
    surface->add_option("--n1", o.n1, "Samples along the first angle");
    surface->add_option("--n2", o.n2, "Samples along the second angle");

    auto* diag = app.add_subcommand("diagnose", "<eta3> cancellation scaling, twist condition or frame quality");
    diag->add_option("kind", o.diagnostic, "cancellation, twist or frame")->required();
    diag->add_option("-i,--input", o.input, "Record")->required();

    auto* index = app.add_subcommand("index", "Rebuild and print the index of a family directory");
    index->add_option("-d,--dir", o.dir, "Family directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfig;
    }

    try {
        if (*seed) return cmd_seed(o);
        if (*refine_cmd) return cmd_refine(o);
        if (*cont) return cmd_continue(o);
        if (*observe) return cmd_observe(o);
        if (*surface) return cmd_export_surface(o);
        if (*diag) return cmd_diagnose(o);
        if (*index) return cmd_index(o);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kConfig;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const IoError& e) {
        std::cerr << "i/o failure: " << e.what() << '\n';
        return kIo;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "i/o failure: " << e.what() << '\n';
        return kIo;
    }
    return kConfig;
}
